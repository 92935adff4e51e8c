#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support/paths.hpp"

namespace {

using nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(MORANDIM_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string tmp_file(const std::string& stem) {
    return "/tmp/morandim_cli_" + std::to_string(getpid()) + "_" + stem;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace

TEST_CASE("cli dims: Cantor document") {
    auto r = run_cli("dims " + testpaths::data_file("cantor.json"));
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    CHECK(rep.at("command") == "dims");
    auto res = rep.at("results");
    CHECK(round6(res.at("set_dimension").get<double>()) == 0.630930);
    CHECK(round6(res.at("updim").get<double>()) == 0.630930);
    CHECK(round6(res.at("lowdim").get<double>()) == 0.630930);
    CHECK(res.at("method") == "both");
}

TEST_CASE("cli dims: numeric fields survive a JSON round-trip") {
    auto r = run_cli("dims " + testpaths::data_file("two_atom.json"));
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    std::string again = rep.dump(2) + "\n";
    CHECK(json::parse(again) == rep);
    CHECK(again == r.out);
}

TEST_CASE("cli mink2: published minimum and methods agree") {
    auto r = run_cli("mink2 " + testpaths::data_file("l10.json"));
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    double d_star = rep.at("results").at("d_star").get<double>();
    CHECK(std::abs(d_star - 0.5360) < 1e-3);

    auto g = run_cli("mink2 --method grid " + testpaths::data_file("l10.json"));
    REQUIRE(g.exit_code == 0);
    double d_grid = json::parse(g.out).at("results").at("d_star").get<double>();
    CHECK(std::abs(d_star - d_grid) <= 1e-6);
}

TEST_CASE("cli mink2: closed form on a two-pair document") {
    std::string path = tmp_file("two_ifs.json");
    {
        std::ofstream out(path);
        out << R"({"base": 0.5, "alphas": [1, 2], "betas": [4, 1], "masses": [0.5, 0.5]})";
    }
    auto r = run_cli("mink2 --method closed-form " + path);
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    CHECK(rep.at("results").at("case") == "split-sign");
    CHECK(rep.at("results").at("d_star").get<double>() == doctest::Approx(1.0));
    std::remove(path.c_str());
}

TEST_CASE("cli synth: target below the set dimension exits 3 and quotes it") {
    auto r = run_cli("synth upper " + testpaths::data_file("cantor.json") +
                     " --target 0.1");
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("0.630930") != std::string::npos);
}

TEST_CASE("cli synth: output document feeds straight back into dims") {
    std::string path = tmp_file("synth_out.json");
    auto r = run_cli("synth upper " + testpaths::data_file("cantor.json") +
                     " --target 1.0 --out " + path);
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    CHECK(rep.at("results").at("achieved").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.at("results").at("mechanism") == "q-cap");

    auto d = run_cli("dims " + path);
    REQUIRE(d.exit_code == 0);
    CHECK(json::parse(d.out).at("results").at("updim").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-6));
    std::remove(path.c_str());
}

TEST_CASE("cli validate: violations are reported with exit 2") {
    std::string path = tmp_file("bad_model.json");
    {
        std::ofstream out(path);
        out << R"({"k": 2, "mode": "dependent",
                   "atoms": [{"mass": 1.0, "scales": [0.5, 0.6], "weights": [0.5, 0.5]}]})";
    }
    auto r = run_cli("validate " + path);
    CHECK(r.exit_code == 2);
    json rep = json::parse(r.out);
    CHECK_FALSE(rep.at("results").at("ok").get<bool>());
    CHECK(rep.at("results").at("violations").size() == 1);
    std::remove(path.c_str());

    auto ok = run_cli("validate " + testpaths::data_file("cantor.json"));
    CHECK(ok.exit_code == 0);
    CHECK(json::parse(ok.out).at("results").at("ok").get<bool>());
}

TEST_CASE("cli exit codes: usage, missing file, missing seed") {
    CHECK(run_cli("frobnicate").exit_code == 64);
    CHECK(run_cli("dims /no/such/file.json").exit_code == 66);
    CHECK(run_cli("simulate " + testpaths::data_file("cantor.json") +
                  " --trials 3")
              .exit_code == 64);  // seed is mandatory
}

TEST_CASE("cli hausdorff and gap") {
    auto r = run_cli("hausdorff " + testpaths::data_file("l3.json"));
    REQUIRE(r.exit_code == 0);
    CHECK(std::abs(json::parse(r.out).at("results").at("set_dimension").get<double>() -
                   0.3398) < 5e-4);

    auto g = run_cli("gap " + testpaths::data_file("l10.json"));
    REQUIRE(g.exit_code == 0);
    CHECK(json::parse(g.out).at("results").at("has_gap").get<bool>());
}

TEST_CASE("cli fj-table: header and row count") {
    std::string path = tmp_file("fj.csv");
    auto r = run_cli("fj-table " + testpaths::data_file("l3.json") +
                     " --points 200 --out " + path);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "p,f0,f1,f2,f3,M");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 200);
    std::remove(path.c_str());
}

TEST_CASE("cli simulate: concentration and interval emission") {
    std::string csv = tmp_file("iv.csv");
    auto r = run_cli("simulate " + testpaths::data_file("two_atom.json") +
                     " --depth 20000 --trials 10 --seed 11 --emit-intervals " + csv +
                     " --interval-depth 4");
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(r.out);
    CHECK(rep.at("results").at("max_path_within_band").get<int>() >= 9);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "address,left,length,measure");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 16);
    std::remove(csv.c_str());
}

TEST_CASE("cli determinism: identical runs produce identical bytes") {
    for (std::string cmd :
         {std::string("dims ") + testpaths::data_file("two_atom.json"),
          std::string("mink2 ") + testpaths::data_file("l10.json"),
          std::string("simulate ") + testpaths::data_file("two_atom.json") +
              " --depth 5000 --trials 5 --seed 3"}) {
        auto a = run_cli(cmd);
        auto b = run_cli(cmd);
        CHECK(a.exit_code == 0);
        CHECK(a.out == b.out);
    }
}
