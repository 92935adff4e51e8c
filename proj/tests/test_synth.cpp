#include <doctest.h>

#include <cmath>
#include <random>

#include "morandim/synth.hpp"
#include "support/generators.hpp"
#include "support/paths.hpp"

using namespace morandim;

namespace {

MoranModel cantor_ifs() {
    return make_independent_model(2, {{1.0, {{1.0 / 3, 1.0 / 3}, {}}}}, {});
}

MoranModel golden_ifs() {
    return make_independent_model(2, {{1.0, {{0.25, 0.5}, {}}}}, {});
}

MoranModel pair_family() {
    return make_independent_model(
        2, {{0.5, {{1.0 / 3, 1.0 / 3}, {}}}, {0.5, {{0.25, 0.5}, {}}}}, {});
}

const double kCantorDim = std::log(2) / std::log(3);

// test-local root of E(log sum scales^x) = 0, independent of the library path
double oracle_set_dimension(const MoranModel& m) {
    auto fam = ifs_family(m);
    auto value = [&](double x) {
        double acc = 0.0;
        for (const auto& a : fam.atoms) {
            double s = 0.0;
            for (double sc : a.ifs.scales) s += std::pow(sc, x);
            acc += a.mass * std::log(s);
        }
        return acc;
    };
    double lo = 0.0, hi = 5.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        double mid = 0.5 * (lo + hi);
        (value(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("synthesize_upper: Cantor at its own dimension gives uniform weights") {
    auto sw = synthesize_upper(cantor_ifs(), kCantorDim);
    CHECK(sw.per_atom[0][0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sw.per_atom[0][1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sw.achieved == doctest::Approx(kCantorDim).epsilon(1e-9));
}

TEST_CASE("synthesize_upper: equicontractive corner mass") {
    auto sw = synthesize_upper(cantor_ifs(), 1.0);
    CHECK(sw.mechanism == WeightMechanism::q_cap);
    CHECK(sw.parameter == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(sw.per_atom[0][0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(sw.per_atom[0][1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(sw.achieved == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synthesize_upper: solved exponent on the golden family") {
    auto sw = synthesize_upper(golden_ifs(), 1.0);
    CHECK(sw.mechanism == WeightMechanism::natural_power);
    CHECK(std::abs(sw.achieved - 1.0) <= 1e-6);
    CHECK(upper_dimension(sw.model) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("synthesize_upper: target below the set dimension is refused") {
    CHECK_THROWS_AS(synthesize_upper(cantor_ifs(), 0.2), PreconditionError);
    CHECK_THROWS_AS(synthesize_upper(cantor_ifs(),
                                     std::numeric_limits<double>::infinity()),
                    PreconditionError);
}

TEST_CASE("synthesize_lower: Cantor corner branch") {
    const double d = std::log(4.0 / 3.0) / std::log(3.0);
    auto sw = synthesize_lower(cantor_ifs(), d);
    CHECK(sw.mechanism == WeightMechanism::q_floor);
    CHECK(sw.parameter == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sw.per_atom[0][0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sw.per_atom[0][1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sw.achieved == doctest::Approx(d).epsilon(1e-9));

    auto at_dim = synthesize_lower(cantor_ifs(), kCantorDim);
    CHECK(at_dim.per_atom[0][0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("synthesize_lower: at the set dimension the weights are natural") {
    double d = oracle_set_dimension(golden_ifs());
    auto sw = synthesize_lower(golden_ifs(), d);
    CHECK(std::abs(sw.achieved - d) <= 1e-6);
    auto nat = natural_weights({{0.25, 0.5}, {}}, d);
    CHECK(sw.per_atom[0][0] == doctest::Approx(nat[0]).epsilon(1e-6));
    CHECK_THROWS_AS(synthesize_lower(golden_ifs(), d + 0.1), PreconditionError);
    CHECK_THROWS_AS(synthesize_lower(golden_ifs(), 0.0), PreconditionError);
}

TEST_CASE("synthesis round-trip on random scale families") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 10; ++i) {
        MoranModel m = testgen::random_ifs_model(rng, i);
        double d = hausdorff_dimension(m);
        double e_log_min = 0.0;
        for (const auto& a : ifs_family(m).atoms) {
            e_log_min += a.mass * std::log(*std::min_element(a.ifs.scales.begin(),
                                                             a.ifs.scales.end()));
        }
        double corner = -std::log(static_cast<double>(m.k)) / e_log_min;
        for (double target : {d, d + 0.2, 2 * d}) {
            auto sw = synthesize_upper(m, target);
            CHECK(std::abs(upper_dimension(sw.model) - target) <= 1e-6);
        }
        for (double target : {d, d / 2, corner}) {
            auto sw = synthesize_lower(m, target);
            CHECK(std::abs(lower_dimension(sw.model) - target) <= 1e-6);
        }
    }
}

TEST_CASE("natural_weights: symmetry, golden ratio, permutation covariance") {
    auto u = natural_weights({{1.0 / 3, 1.0 / 3}, {}}, 0.73);
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-14));

    double d = oracle_set_dimension(golden_ifs());
    auto g = natural_weights({{0.25, 0.5}, {}}, d);
    CHECK(g[0] == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-9));

    auto a = natural_weights({{0.1, 0.3, 0.2}, {}}, 0.4);
    auto b = natural_weights({{0.2, 0.1, 0.3}, {}}, 0.4);
    CHECK(a[0] == doctest::Approx(b[1]).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(b[2]).epsilon(1e-14));
    CHECK(a[2] == doctest::Approx(b[0]).epsilon(1e-14));
}

TEST_CASE("detect_gap: mixed pair has a gap with the expected witness") {
    auto v = detect_gap(pair_family());
    CHECK(v.has_gap);
    REQUIRE(v.witness.has_value());
    double d = oracle_set_dimension(pair_family());
    CHECK(v.set_dimension == doctest::Approx(d).epsilon(1e-10));
    CHECK(v.witness->child == 0);
    CHECK(v.witness->eta_a == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.witness->eta_b ==
          doctest::Approx(1.0 / (1.0 + std::pow(2.0, d))).epsilon(1e-9));
}

TEST_CASE("detect_gap: equicontractive-within-atom family has none") {
    MoranModel m = make_independent_model(
        2, {{0.4, {{0.2, 0.2}, {}}}, {0.6, {{0.35, 0.35}, {}}}}, {});
    auto v = detect_gap(m);
    CHECK_FALSE(v.has_gap);
    REQUIRE(v.common_weights.has_value());
    CHECK((*v.common_weights)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("detect_gap: ten-pair exponent family") {
    MoranModel m = load_model(testpaths::slurp(testpaths::data_file("l10.json")));
    CHECK(detect_gap(m).has_gap);
}

TEST_CASE("updim_for_weight: fixed values and the boundary blow-up") {
    CHECK(updim_for_weight(cantor_ifs(), {0.5, 0.5}) ==
          doctest::Approx(kCantorDim).epsilon(1e-12));
    MoranModel l3 = load_model(testpaths::slurp(testpaths::data_file("l3.json")));
    // top curve at p = 1/2: log 2 / (mean exponent * log 3)
    double want = std::log(2.0) / ((3.2 / 3.0) * std::log(3.0));
    CHECK(updim_for_weight(l3, {0.5, 0.5}) == doctest::Approx(want).epsilon(1e-10));
    CHECK(updim_for_weight(l3, {1e-6, 1.0 - 1e-6}) > 10.0);
    // the blow-up toward the other corner is slower (the vanishing weight
    // sits on the smaller scales) but still monotone in the corner mass
    double m6 = updim_for_weight(l3, {1.0 - 1e-6, 1e-6});
    double m9 = updim_for_weight(l3, {1.0 - 1e-9, 1e-9});
    CHECK(m6 > hausdorff_dimension(l3));
    CHECK(m9 > m6 + 1.0);
}

TEST_CASE("minimize_upper_dimension: known families") {
    MoranModel l3 = load_model(testpaths::slurp(testpaths::data_file("l3.json")));
    auto r3 = minimize_upper_dimension(l3);
    CHECK(std::abs(r3.value - 0.4138) < 5e-4);
    CHECK(r3.weights[0] == doctest::Approx(2.0 / 3).epsilon(1e-5));

    auto rc = minimize_upper_dimension(cantor_ifs());
    CHECK(rc.value == doctest::Approx(kCantorDim).epsilon(1e-9));
    CHECK(rc.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("maximize_lower_dimension: gap strictness and no-gap attainment") {
    MoranModel l3 = load_model(testpaths::slurp(testpaths::data_file("l3.json")));
    double d3 = hausdorff_dimension(l3);
    auto lo3 = maximize_lower_dimension(l3);
    CHECK(lo3.value < d3);

    auto loc = maximize_lower_dimension(cantor_ifs());
    CHECK(loc.value == doctest::Approx(kCantorDim).epsilon(1e-9));

    MoranModel eq = make_independent_model(
        2, {{0.4, {{0.2, 0.2}, {}}}, {0.6, {{0.35, 0.35}, {}}}}, {});
    double deq = hausdorff_dimension(eq);
    auto loe = maximize_lower_dimension(eq);
    CHECK(std::abs(loe.value - deq) <= 1e-9);
    CHECK(loe.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("no gap: natural weights attain the set dimension on both sides") {
    MoranModel eq = make_independent_model(
        3, {{0.5, {{0.15, 0.15, 0.15}, {}}}, {0.5, {{0.22, 0.22, 0.22}, {}}}}, {});
    auto v = detect_gap(eq);
    REQUIRE_FALSE(v.has_gap);
    double d = v.set_dimension;
    CHECK(std::abs(updim_for_weight(eq, *v.common_weights) - d) <= 1e-9);
    CHECK(std::abs(lowdim_for_weight(eq, *v.common_weights) - d) <= 1e-9);
}

TEST_CASE("gapped family: every single weight stays above the set dimension") {
    MoranModel fam = pair_family();
    double d = hausdorff_dimension(fam);
    auto mn = minimize_upper_dimension(fam);
    CHECK(mn.value > d);
    for (double p = 0.05; p < 1.0; p += 0.05) {
        CHECK(updim_for_weight(fam, {p, 1.0 - p}) >= mn.value - 1e-9);
    }
}

TEST_CASE("interval attainment by continuation from the minimizer") {
    MoranModel fam = pair_family();
    auto mn = minimize_upper_dimension(fam);
    for (double target : {mn.value, mn.value + 0.1, mn.value + 1.0}) {
        auto w = weight_for_target_updim(fam, target);
        CHECK(std::abs(updim_for_weight(fam, w) - target) <= 1e-6);
    }
    CHECK_THROWS_AS(weight_for_target_updim(fam, mn.value - 0.05), PreconditionError);
}

TEST_CASE("a weight mixture never undercuts both of its pure weights") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 10; ++i) {
        MoranModel fam = testgen::random_ifs_model(rng, i + 1);
        auto w1 = testgen::random_weights(rng, fam.k);
        auto w2 = testgen::random_weights(rng, fam.k);
        double lambda = testgen::uniform(rng, 0.1, 0.9);
        MoranModel mix = make_independent_model(
            fam.k, ifs_family(fam).atoms, {{lambda, {w1}}, {1.0 - lambda, {w2}}});
        double mixed = upper_dimension(mix);
        double pure = std::min(updim_for_weight(fam, w1), updim_for_weight(fam, w2));
        CHECK(mixed >= pure - 1e-9);
    }
}
