#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "morandim/dims.hpp"
#include "morandim/model.hpp"
#include "morandim/selectors.hpp"

namespace morandim::sim {

// All randomness comes from mt19937_64 engines seeded through splitmix64;
// uniforms take the top 53 bits, so sequences are identical across platforms.

struct LambdaSequence {
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> draws;  // atom indices, iid by mass
};

LambdaSequence sample_sequence(const ExpandedModel& em, std::size_t n,
                               std::uint64_t seed);

struct PathStats {
    std::string rule;
    double sum_log_weight = 0.0;
    double sum_log_scale = 0.0;
    std::vector<std::pair<std::size_t, double>> trace;  // (step, running ratio)
    double final_ratio = 0.0;
};

// Running log-weight / log-scale ratio along a fixed selector path; converges
// to the selector's expectation ratio.
PathStats path_ratio(const ExpandedModel& em, const LambdaSequence& seq,
                     const Selector& chi);

struct EmpiricalSummary {
    double updim = 0.0;   // exact targets
    double lowdim = 0.0;
    std::vector<double> max_path_ratios;  // greedy path at theta = updim
    std::vector<double> min_path_ratios;  // greedy path at theta = lowdim
    std::size_t steps = 0;
    int trials = 0;
    std::uint64_t seed = 0;
};

// Per-trial final ratios along the two greedy extremal-child paths; they
// concentrate at the exact upper/lower dimensions.
EmpiricalSummary empirical_dimensions(const MoranModel& m, std::size_t n,
                                      int trials, std::uint64_t seed,
                                      const DimOptions& opt = {});

struct MoranInterval {
    std::string address;  // concatenated 1-based child labels, e.g. "121"
    double left = 0.0;
    double length = 0.0;
    double measure = 0.0;
};

// Emits every interval of the given construction level (all addresses of that
// length, or only those under `prefix`). Lengths multiply the scales along
// the address, measures the weights. Requires K <= 9 for the address labels.
void moran_intervals(const ExpandedModel& em, const LambdaSequence& seq,
                     int depth, const std::string& prefix,
                     const std::function<void(const MoranInterval&)>& emit);

// CSV with header "address,left,length,measure".
void write_intervals_csv(const ExpandedModel& em, const LambdaSequence& seq,
                         int depth, const std::string& prefix, std::ostream& os);

}  // namespace morandim::sim
