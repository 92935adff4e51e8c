#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "morandim/model.hpp"

namespace morandim {

// Deterministic child choice per expanded atom (0-based child indices).
struct Selector {
    std::vector<int> choice;
    friend bool operator==(const Selector&, const Selector&) = default;
};

// Ratio of expected log-weight to expected log-scale along an extremal child.
struct RatioValue {
    double theta = 0.0;
    double log_weight_mean = 0.0;  // expected log weight at the chosen child
    double log_scale_mean = 0.0;   // expected log scale at the chosen child
    double value = 0.0;            // log_weight_mean / log_scale_mean
    Selector chosen;
};

inline constexpr std::uint64_t kDefaultSelectorCap = std::uint64_t{1} << 26;

// Smallest child index maximizing scale^theta / weight (log-space comparison;
// near-ties within 1e-14 relative resolve to the smallest index).
int max_ratio_child(double theta, const ExpandedAtom& atom);
// Smallest child index minimizing the same ratio.
int min_ratio_child(double theta, const ExpandedAtom& atom);

RatioValue upper_ratio(const ExpandedModel& em, double theta);
RatioValue lower_ratio(const ExpandedModel& em, double theta);

// Expected log-weight over expected log-scale along a fixed selector.
double selector_ratio(const ExpandedModel& em, const Selector& chi);

// K^|Lambda|, refusing with EnumerationCapError when it exceeds `cap`.
std::uint64_t selector_count(const ExpandedModel& em,
                             std::uint64_t cap = kDefaultSelectorCap);

// Visits every selector exactly once, lexicographic in atom order. The
// Selector reference is reused between calls; copy it to keep it.
void enumerate_selectors(const ExpandedModel& em,
                         const std::function<void(const Selector&)>& visit,
                         std::uint64_t cap = kDefaultSelectorCap);

// Exhaustive extremes of selector_ratio over all selectors. Ties resolve to
// the lexicographically smallest selector, so results are independent of the
// thread count.
struct SelectorExtremes {
    double max_value = 0.0;
    double min_value = 0.0;
    Selector argmax;
    Selector argmin;
};
SelectorExtremes selector_extremes(const ExpandedModel& em,
                                   std::uint64_t cap = kDefaultSelectorCap,
                                   int threads = 1);

}  // namespace morandim
