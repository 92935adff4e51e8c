// morandim: dimension toolkit for finite random Moran models.
// Subcommands mirror the library modules; every command prints one JSON
// report on stdout. CSV tables go to files named by --out flags.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "morandim/dims.hpp"
#include "morandim/k2.hpp"
#include "morandim/model.hpp"
#include "morandim/selectors.hpp"
#include "morandim/sim.hpp"
#include "morandim/synth.hpp"

namespace {

using nlohmann::json;
using namespace morandim;

constexpr int kExitValidation = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitConsistency = 4;
constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;

struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    return out;
}

json selector_json(const Selector& chi) {
    json arr = json::array();
    for (int c : chi.choice) arr.push_back(c + 1);  // 1-based child labels
    return arr;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::bisect: return "bisect";
        case Method::enumeration: return "enum";
        case Method::both: return "both";
        default: return "auto";
    }
}

json gap_json(const GapVerdict& v) {
    json g;
    g["has_gap"] = v.has_gap;
    g["set_dimension"] = v.set_dimension;
    g["natural_weights_per_atom"] = v.natural_weights_per_atom;
    if (v.witness) {
        g["witness"] = {{"child", v.witness->child + 1},
                        {"atom", v.witness->atom_a},
                        {"atom_prime", v.witness->atom_b},
                        {"eta", v.witness->eta_a},
                        {"eta_prime", v.witness->eta_b}};
    }
    if (v.common_weights) g["common_weights"] = *v.common_weights;
    return g;
}

const char* mechanism_name(WeightMechanism m) {
    switch (m) {
        case WeightMechanism::natural_power: return "natural-power-t";
        case WeightMechanism::q_floor: return "q-floor";
        default: return "q-cap";
    }
}

struct Cli {
    std::string model_path;
    int threads = 1;
    bool timing = false;

    double tol = 1e-10;
    double haus_tol = 1e-12;
    std::string method = "auto";
    double target = 0.0;
    std::string out_path;
    std::string k2_method = "algorithm";
    double base = 0.0;  // 0 = document base if present, else 1/2
    int points = 1000;
    std::uint64_t seed = 0;
    std::uint64_t depth = 100000;
    int trials = 100;
    int interval_depth = 10;
    std::string prefix;
};

DimOptions dim_options(const Cli& c) {
    DimOptions o;
    o.tol = c.tol;
    o.threads = c.threads;
    if (c.method == "bisect") o.method = Method::bisect;
    else if (c.method == "enum") o.method = Method::enumeration;
    else if (c.method == "both") o.method = Method::both;
    else o.method = Method::automatic;
    return o;
}

json run_validate(const Cli& c, int* exit_code) {
    json res;
    std::string text = read_file(c.model_path);
    MoranModel m;
    try {
        m = load_model(text);
    } catch (const ValidationError& e) {
        res["ok"] = false;
        res["violations"] = json::array();
        std::istringstream is(e.what());
        std::string line;
        std::getline(is, line);  // drop the "invalid model:" headline
        while (std::getline(is, line)) {
            res["violations"].push_back(line.substr(line.find_first_not_of(' ')));
        }
        *exit_code = kExitValidation;
        return res;
    }
    const ExpandedModel em = expand(m);
    res["ok"] = true;
    res["violations"] = json::array();
    res["k"] = m.k;
    res["mode"] = m.mode == Mode::dependent ? "dependent" : "independent";
    res["lambda_size"] = em.size();
    res["weighted"] = em.weighted;
    res["min_scale"] = em.min_scale;
    res["max_scale_sum"] = em.max_scale_sum;
    res["tau"] = em.tau;
    return res;
}

json run_hausdorff(const Cli& c, json& tolerances) {
    tolerances["tol"] = c.haus_tol;
    MoranModel m = load_model(read_file(c.model_path));
    return {{"set_dimension", hausdorff_dimension(m, c.haus_tol)}};
}

json run_dims(const Cli& c, json& tolerances) {
    DimOptions opt = dim_options(c);
    tolerances["tol"] = opt.tol;
    tolerances["selector_cap"] = opt.selector_cap;
    MoranModel m = load_model(read_file(c.model_path));
    DimensionReport rep = dimension_report(m, opt);
    json res;
    res["set_dimension"] = rep.set_dimension;
    res["updim"] = rep.updim;
    res["lowdim"] = rep.lowdim;
    res["method"] = method_name(rep.method_used);
    res["residual_up"] = rep.residual_up;
    res["residual_low"] = rep.residual_low;
    if (rep.argmax_selector) res["argmax_selector"] = selector_json(*rep.argmax_selector);
    if (rep.argmin_selector) res["argmin_selector"] = selector_json(*rep.argmin_selector);
    if (m.mode == Mode::independent) res["gap"] = gap_json(detect_gap(m));
    return res;
}

json run_synth(const Cli& c, bool upper, json& tolerances) {
    tolerances["verify_tol"] = 1e-6;
    MoranModel m = load_model(read_file(c.model_path));
    SynthesizedWeights sw = upper ? synthesize_upper(m, c.target, dim_options(c))
                                  : synthesize_lower(m, c.target, dim_options(c));
    json res;
    res["direction"] = upper ? "upper" : "lower";
    res["target"] = sw.target;
    res["achieved"] = sw.achieved;
    res["mechanism"] = mechanism_name(sw.mechanism);
    res["parameter"] = sw.parameter;
    res["weights_per_atom"] = sw.per_atom;
    res["model"] = json::parse(save_model(sw.model));
    if (!c.out_path.empty()) {
        auto out = open_out(c.out_path);
        out << save_model(sw.model);
        res["out"] = c.out_path;
    }
    return res;
}

json run_gap(const Cli& c) {
    MoranModel m = load_model(read_file(c.model_path));
    return gap_json(detect_gap(m));
}

json run_mink2(const Cli& c, json& tolerances) {
    std::string text = read_file(c.model_path);
    double base = c.base;
    if (base == 0.0) {
        base = 0.5;
        try {
            json doc = json::parse(text);
            if (doc.is_object() && doc.contains("base") && doc.at("base").is_number()) {
                base = doc.at("base").get<double>();
            }
        } catch (const json::parse_error&) {
            // load_model reports the malformed document below
        }
    }
    MoranModel m = load_model(text);
    k2::K2Spec spec = k2::from_model(m, base);

    json res;
    res["base"] = spec.base;
    res["mirrored"] = spec.mirrored;
    res["n_nonneg"] = spec.n_nonneg;
    res["alphas"] = spec.alpha;
    res["betas"] = spec.beta;
    res["masses"] = spec.mass;
    if (c.k2_method == "closed-form") {
        auto r = k2::two_ifs_minimum(spec);
        res["method"] = "closed-form";
        res["p_star"] = r.p_star;
        res["d_star"] = r.d_star;
        res["case"] = r.tag == k2::TwoIfsCase::split_sign    ? "split-sign"
                      : r.tag == k2::TwoIfsCase::both_nonneg ? "both-nonneg"
                                                             : "equal-pair";
    } else if (c.k2_method == "grid") {
        tolerances["refine_tol"] = 1e-10;
        auto r = k2::minimize_by_grid(spec);
        res["method"] = "grid";
        res["p_star"] = r.p_star;
        res["d_star"] = r.d_star;
    } else {
        tolerances["root_tol"] = 1e-12;
        auto r = k2::minimize_by_transitions(spec);
        res["method"] = "algorithm";
        res["p_star"] = r.p_star;
        res["d_star"] = r.d_star;
        json trace;
        trace["curves"] = r.trace.curves;
        trace["stop_rule"] = r.trace.stop_rule;
        trace["transitions"] = json::array();
        for (const auto& t : r.trace.transitions) {
            trace["transitions"].push_back(
                {{"b", t.b},
                 {"from", t.from_j},
                 {"to", t.to_j},
                 {"side", t.side == k2::Side::left ? "left" : "right"}});
        }
        res["trace"] = std::move(trace);
    }
    res["set_dimension"] = hausdorff_dimension(m, 1e-13);
    return res;
}

json run_fj_table(const Cli& c) {
    std::string text = read_file(c.model_path);
    double base = c.base;
    if (base == 0.0) {
        base = 0.5;
        try {
            json doc = json::parse(text);
            if (doc.is_object() && doc.contains("base") && doc.at("base").is_number()) {
                base = doc.at("base").get<double>();
            }
        } catch (const json::parse_error&) {
        }
    }
    MoranModel m = load_model(text);
    k2::K2Spec spec = k2::from_model(m, base);
    k2::CurveTable table = k2::curve_table(spec, c.points);
    auto out = open_out(c.out_path);
    k2::write_curve_table_csv(table, out);

    std::size_t best = 0;
    for (std::size_t i = 1; i < table.m.size(); ++i) {
        if (table.m[i] < table.m[best]) best = i;
    }
    json res;
    res["out"] = c.out_path;
    res["rows"] = table.p.size();
    res["columns"] = table.f.size() + 2;
    res["min_m"] = table.m[best];
    res["argmin_p"] = table.p[best];
    return res;
}

json run_simulate(const Cli& c, json& tolerances) {
    tolerances["ratio_band"] = 0.02;
    MoranModel m = load_model(read_file(c.model_path));
    auto summary = sim::empirical_dimensions(m, c.depth, c.trials, c.seed,
                                             dim_options(c));
    json res;
    res["steps"] = summary.steps;
    res["trials"] = summary.trials;
    res["seed"] = summary.seed;
    res["updim"] = summary.updim;
    res["lowdim"] = summary.lowdim;
    res["max_path_ratios"] = summary.max_path_ratios;
    res["min_path_ratios"] = summary.min_path_ratios;
    int in_up = 0, in_dn = 0;
    for (double r : summary.max_path_ratios) {
        if (std::abs(r - summary.updim) <= 0.02) ++in_up;
    }
    for (double r : summary.min_path_ratios) {
        if (std::abs(r - summary.lowdim) <= 0.02) ++in_dn;
    }
    res["max_path_within_band"] = in_up;
    res["min_path_within_band"] = in_dn;
    if (!c.out_path.empty()) {
        const ExpandedModel em = expand(m);
        auto seq = sim::sample_sequence(
            em, std::max<std::size_t>(c.interval_depth, 1), c.seed);
        auto out = open_out(c.out_path);
        sim::write_intervals_csv(em, seq, c.interval_depth, c.prefix, out);
        res["intervals_out"] = c.out_path;
        res["interval_depth"] = c.interval_depth;
    }
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    Cli c;
    CLI::App app{"dimension toolkit for finite random Moran measures"};
    app.require_subcommand(1);
    app.add_option("--threads", c.threads, "worker threads for enumeration")
        ->default_val(1);
    app.add_flag("--timing", c.timing, "include wall_time_s in the report");

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", c.model_path, "model document (JSON)")->required();
    };

    auto* validate = app.add_subcommand("validate", "check a model document");
    add_model(validate);

    auto* hausdorff = app.add_subcommand("hausdorff", "a.s. dimension of the random set");
    add_model(hausdorff);
    hausdorff->add_option("--tol", c.haus_tol)->default_val(1e-12);

    auto* dims = app.add_subcommand("dims", "a.s. measure dimensions");
    add_model(dims);
    dims->add_option("--method", c.method)
        ->check(CLI::IsMember({"bisect", "enum", "both", "auto"}))
        ->default_val("auto");
    dims->add_option("--tol", c.tol)->default_val(1e-10);

    auto* synth = app.add_subcommand("synth", "weights achieving a target dimension");
    synth->require_subcommand(1);
    auto* synth_up = synth->add_subcommand("upper", "target the upper dimension");
    auto* synth_lo = synth->add_subcommand("lower", "target the lower dimension");
    for (auto* sub : {synth_up, synth_lo}) {
        add_model(sub);
        sub->add_option("--target", c.target)->required();
        sub->add_option("--out", c.out_path, "write the weighted model here");
    }

    auto* gap = app.add_subcommand("gap", "independent-probabilities dimension gap");
    add_model(gap);

    auto* mink2 = app.add_subcommand("mink2", "minimal upper dimension for K = 2");
    add_model(mink2);
    mink2->add_option("--method", c.k2_method)
        ->check(CLI::IsMember({"algorithm", "grid", "closed-form"}))
        ->default_val("algorithm");
    mink2->add_option("--base", c.base, "exponent base (default: document base or 1/2)");

    auto* fj = app.add_subcommand("fj-table", "CSV of the K = 2 dimension curves");
    add_model(fj);
    fj->add_option("--out", c.out_path)->required();
    fj->add_option("--points", c.points)->default_val(1000);
    fj->add_option("--base", c.base);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo corroboration");
    add_model(simulate);
    simulate->add_option("--depth", c.depth)->default_val(100000);
    simulate->add_option("--trials", c.trials)->default_val(100);
    simulate->add_option("--seed", c.seed)->required();
    simulate->add_option("--emit-intervals", c.out_path, "interval CSV path");
    simulate->add_option("--interval-depth", c.interval_depth)->default_val(10);
    simulate->add_option("--prefix", c.prefix, "interval address filter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const auto started = std::chrono::steady_clock::now();
    json report;
    report["schema_version"] = "1";
    json argv_echo = json::array();
    for (int i = 1; i < argc; ++i) argv_echo.push_back(argv[i]);
    report["argv"] = argv_echo;
    json tolerances = json::object();
    int exit_code = 0;

    try {
        json results;
        if (app.got_subcommand(validate)) {
            report["command"] = "validate";
            results = run_validate(c, &exit_code);
        } else if (app.got_subcommand(hausdorff)) {
            report["command"] = "hausdorff";
            results = run_hausdorff(c, tolerances);
        } else if (app.got_subcommand(dims)) {
            report["command"] = "dims";
            results = run_dims(c, tolerances);
        } else if (app.got_subcommand(synth)) {
            report["command"] = "synth";
            results = run_synth(c, synth->got_subcommand(synth_up), tolerances);
        } else if (app.got_subcommand(gap)) {
            report["command"] = "gap";
            results = run_gap(c);
        } else if (app.got_subcommand(mink2)) {
            report["command"] = "mink2";
            results = run_mink2(c, tolerances);
        } else if (app.got_subcommand(fj)) {
            report["command"] = "fj-table";
            results = run_fj_table(c);
        } else if (app.got_subcommand(simulate)) {
            report["command"] = "simulate";
            results = run_simulate(c, tolerances);
        }
        try {
            report["model_digest"] = model_digest(load_model(read_file(c.model_path)));
        } catch (...) {
            report["model_digest"] = nullptr;
        }
        report["tolerances"] = tolerances;
        report["results"] = std::move(results);
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConsistency;
    }

    if (c.timing) {
        report["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count();
    }
    std::cout << report.dump(2) << "\n";
    return exit_code;
}
