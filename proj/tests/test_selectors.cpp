#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "morandim/selectors.hpp"
#include "support/generators.hpp"

using namespace morandim;

namespace {

ExpandedAtom atom_of(std::vector<double> scales, std::vector<double> weights) {
    const int k = static_cast<int>(scales.size());
    MoranModel m = make_dependent_model(
        k, {{1.0, {std::move(scales), {}}, std::move(weights)}});
    return expand(m).atoms[0];
}

MoranModel two_atom_model() {
    return make_dependent_model(
        2, {{0.5, {{0.25, 0.5}, {}}, {0.5, 0.5}},
            {0.5, {{1.0 / 3, 1.0 / 3}, {}}, {1.0 / 3, 2.0 / 3}}});
}

}  // namespace

TEST_CASE("max_ratio_child: ties go to the smallest index") {
    auto cantor = atom_of({1.0 / 3, 1.0 / 3}, {0.5, 0.5});
    CHECK(max_ratio_child(7.0, cantor) == 0);
    CHECK(min_ratio_child(3.0, cantor) == 0);

    auto mixed = atom_of({0.25, 0.5}, {0.5, 0.5});
    CHECK(max_ratio_child(1.0, mixed) == 1);  // 0.5/0.5 beats 0.25/0.5
    CHECK(max_ratio_child(0.0, mixed) == 0);  // ratios tie at theta = 0
    CHECK(min_ratio_child(1.0, mixed) == 0);
}

TEST_CASE("min_ratio_child: equal scales reduce to the heaviest weight") {
    auto a = atom_of({1.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3});
    for (double theta : {0.0, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(min_ratio_child(theta, a) == 1);
        CHECK(max_ratio_child(theta, a) == 0);
    }
}

TEST_CASE("upper_ratio: Cantor value is scale-free") {
    MoranModel m = make_dependent_model(
        2, {{1.0, {{1.0 / 3, 1.0 / 3}, {}}, {0.5, 0.5}}});
    auto em = expand(m);
    for (double theta : {0.0, 0.5, 1.0, 4.0}) {
        CHECK(upper_ratio(em, theta).value ==
              doctest::Approx(std::log(2) / std::log(3)).epsilon(1e-15));
    }
}

TEST_CASE("upper_ratio: hand-picked two-atom model hits 1 exactly at theta=1") {
    auto em = expand(two_atom_model());
    auto r = upper_ratio(em, 1.0);
    CHECK(r.value == 1.0);
    CHECK(r.chosen.choice == std::vector<int>{1, 0});
    CHECK(r.log_weight_mean < 0.0);
    CHECK(r.log_scale_mean < 0.0);
}

TEST_CASE("ratio values are positive and finite everywhere") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        MoranModel m = testgen::random_model(rng, i);
        auto em = expand(m);
        for (double theta : {0.0, 0.1, 0.7, 1.3, 5.0, 40.0}) {
            for (auto r : {upper_ratio(em, theta), lower_ratio(em, theta)}) {
                CHECK(r.value > 0.0);
                CHECK(std::isfinite(r.value));
                CHECK(r.log_weight_mean < 0.0);
                CHECK(r.log_scale_mean < 0.0);
            }
        }
    }
}

TEST_CASE("selector_ratio: four-selector hand enumeration") {
    auto em = expand(two_atom_model());
    const double l2 = std::log(2), l3 = std::log(3), l4 = std::log(4);
    const double l32 = std::log(1.5);
    // selector (1,1): weights (1/2, 1/3), scales (1/4, 1/3)
    CHECK(selector_ratio(em, {{0, 0}}) ==
          doctest::Approx((l2 + l3) / (l4 + l3)).epsilon(1e-14));
    // selector (1,2): weights (1/2, 2/3), scales (1/4, 1/3)
    CHECK(selector_ratio(em, {{0, 1}}) ==
          doctest::Approx((l2 + l32) / (l4 + l3)).epsilon(1e-14));
    // selector (2,1): weights (1/2, 1/3), scales (1/2, 1/3)
    CHECK(selector_ratio(em, {{1, 0}}) == doctest::Approx(1.0).epsilon(1e-15));
    // selector (2,2): weights (1/2, 2/3), scales (1/2, 1/3)
    CHECK(selector_ratio(em, {{1, 1}}) ==
          doctest::Approx((l2 + l32) / (l2 + l3)).epsilon(1e-14));
}

TEST_CASE("selector_ratio equals the ratio of its extremal selector") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 10; ++i) {
        MoranModel m = testgen::random_model(rng, i);
        auto em = expand(m);
        for (double theta : {0.0, 0.4, 1.0, 2.7, 9.0}) {
            auto up = upper_ratio(em, theta);
            CHECK(selector_ratio(em, up.chosen) == doctest::Approx(up.value).epsilon(1e-15));
            auto dn = lower_ratio(em, theta);
            CHECK(selector_ratio(em, dn.chosen) == doctest::Approx(dn.value).epsilon(1e-15));
        }
    }
}

TEST_CASE("enumerate_selectors: counts and lexicographic order") {
    MoranModel m2 = make_independent_model(
        2, {{0.5, {{0.2, 0.3}, {}}}, {0.5, {{0.1, 0.4}, {}}}}, {{1.0, {{0.5, 0.5}}}});
    auto em2 = expand(m2);
    std::vector<Selector> seen;
    enumerate_selectors(em2, [&](const Selector& s) { seen.push_back(s); });
    REQUIRE(seen.size() == 4);
    CHECK(seen[0].choice == std::vector<int>{0, 0});
    CHECK(seen[1].choice == std::vector<int>{0, 1});
    CHECK(seen[2].choice == std::vector<int>{1, 0});
    CHECK(seen[3].choice == std::vector<int>{1, 1});

    MoranModel m3 = make_dependent_model(
        3, {{0.4, {{0.1, 0.2, 0.3}, {}}, {0.3, 0.3, 0.4}},
            {0.3, {{0.2, 0.2, 0.2}, {}}, {0.2, 0.5, 0.3}},
            {0.3, {{0.3, 0.1, 0.2}, {}}, {0.25, 0.5, 0.25}}});
    auto em3 = expand(m3);
    std::set<std::vector<int>> unique_sel;
    enumerate_selectors(em3, [&](const Selector& s) { unique_sel.insert(s.choice); });
    CHECK(unique_sel.size() == 27);
}

TEST_CASE("enumerate_selectors refuses above the cap") {
    std::vector<MassIfs> ifs;
    for (int i = 0; i < 30; ++i) ifs.push_back({1.0 / 30, {{0.2, 0.3}, {}}});
    MoranModel m = make_independent_model(2, std::move(ifs), {{1.0, {{0.5, 0.5}}}});
    auto em = expand(m);
    CHECK_THROWS_AS(enumerate_selectors(em, [](const Selector&) {}),
                    EnumerationCapError);
    try {
        selector_count(em);
    } catch (const EnumerationCapError& e) {
        CHECK(e.selector_count == doctest::Approx(std::pow(2.0, 30)));
    }
}

TEST_CASE("every extremal-child ratio lies between the selector extremes") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
        MoranModel m = testgen::random_model(rng, i, 5, 2);
        auto em = expand(m);
        auto ext = selector_extremes(em);
        for (double theta : {0.0, 0.3, 1.1, 6.0}) {
            double gu = upper_ratio(em, theta).value;
            double gl = lower_ratio(em, theta).value;
            CHECK(gu >= ext.min_value - 1e-12);
            CHECK(gu <= ext.max_value + 1e-12);
            CHECK(gl >= ext.min_value - 1e-12);
            CHECK(gl <= ext.max_value + 1e-12);
        }
    }
}

TEST_CASE("selector_extremes is independent of the thread count") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 6; ++i) {
        MoranModel m = testgen::random_model(rng, i);
        auto em = expand(m);
        auto a = selector_extremes(em, kDefaultSelectorCap, 1);
        auto b = selector_extremes(em, kDefaultSelectorCap, 4);
        CHECK(a.max_value == b.max_value);
        CHECK(a.min_value == b.min_value);
        CHECK(a.argmax.choice == b.argmax.choice);
        CHECK(a.argmin.choice == b.argmin.choice);
    }
}

TEST_CASE("tie-break determinism across repeated evaluations") {
    auto em = expand(two_atom_model());
    for (int rep = 0; rep < 3; ++rep) {
        for (double theta = 0.0; theta < 5.0; theta += 0.37) {
            auto a = upper_ratio(em, theta);
            auto b = upper_ratio(em, theta);
            CHECK(a.chosen.choice == b.chosen.choice);
            CHECK(a.value == b.value);
        }
    }
}

TEST_CASE("K=2 single weight: each atom's chosen child switches at most once") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 10; ++i) {
        const int n = 1 + static_cast<int>(rng() % 4);
        std::vector<MassIfs> ifs;
        auto masses = testgen::random_masses(rng, n);
        for (int a = 0; a < n; ++a) {
            ifs.push_back({masses[a], {testgen::random_scales(rng, 2), {}}});
        }
        MoranModel m = make_independent_model(
            2, std::move(ifs), {{1.0, {testgen::random_weights(rng, 2)}}});
        auto em = expand(m);
        std::vector<int> switches(em.size(), 0);
        std::vector<int> prev(em.size(), -1);
        for (double theta = 0.0; theta <= 60.0; theta += 0.01) {
            for (std::size_t a = 0; a < em.size(); ++a) {
                int c = max_ratio_child(theta, em.atoms[a]);
                if (prev[a] >= 0 && c != prev[a]) ++switches[a];
                prev[a] = c;
            }
        }
        for (int s : switches) CHECK(s <= 1);
    }
}
