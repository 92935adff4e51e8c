#pragma once

#include <optional>
#include <vector>

#include "morandim/dims.hpp"
#include "morandim/model.hpp"

namespace morandim {

enum class WeightMechanism {
    natural_power,  // weights scale_i^t / sum scale^t for a solved exponent t
    q_floor,        // corner mass q >= 1/K on the smallest-scale child
    q_cap,          // corner mass q <= 1/K (equicontractive family)
};

struct SynthesizedWeights {
    std::vector<std::vector<double>> per_atom;  // one vector per scale atom
    double target = 0.0;
    double achieved = 0.0;
    WeightMechanism mechanism = WeightMechanism::natural_power;
    double parameter = 0.0;  // the exponent t or the corner mass q
    MoranModel model;        // the weighted model, ready for dimension checks
};

// Per-atom weights whose random measure attains upper dimension `target`
// (target >= set dimension). Achieved value is re-verified through the
// dimension machinery; disagreement beyond 1e-6 raises ConsistencyError.
SynthesizedWeights synthesize_upper(const MoranModel& ifs_model, double target,
                                    const DimOptions& opt = {});

// Same for the lower dimension, target in (0, set dimension].
SynthesizedWeights synthesize_lower(const MoranModel& ifs_model, double target,
                                    const DimOptions& opt = {});

// scale_i^d / sum_l scale_l^d
std::vector<double> natural_weights(const IfsAtom& atom, double set_dim);

struct GapWitness {
    int child = 0;       // 0-based child index
    int atom_a = 0;      // 0-based scale-atom indices
    int atom_b = 0;
    double eta_a = 0.0;  // the two differing natural weights
    double eta_b = 0.0;
};

struct GapVerdict {
    bool has_gap = false;
    double set_dimension = 0.0;
    std::optional<GapWitness> witness;
    std::vector<std::vector<double>> natural_weights_per_atom;
    // present when !has_gap: the one weight vector attaining both dimensions
    std::optional<std::vector<double>> common_weights;
};

// A gap exists iff the natural weights differ across scale atoms for some
// child; then no independent weights can bring the measure dimension down to
// the set dimension.
GapVerdict detect_gap(const MoranModel& ifs_model);

// Upper / lower dimension of the measure driven by one deterministic weight
// vector on the model's scale family.
double updim_for_weight(const MoranModel& ifs_model, std::vector<double> w,
                        const DimOptions& opt = {});
double lowdim_for_weight(const MoranModel& ifs_model, std::vector<double> w,
                         const DimOptions& opt = {});

struct SimplexSearch {
    int grid_per_dim = 64;
    double refine_tol = 1e-9;   // on weight coordinates
    double weight_floor = 1e-9;
    DimOptions dims;
};

struct WeightOptimum {
    std::vector<double> weights;
    double value = 0.0;
};

// Global minimum of the upper dimension over single weight vectors
// (the objective is convex on the simplex).
WeightOptimum minimize_upper_dimension(const MoranModel& ifs_model,
                                       const SimplexSearch& search = {});

// Best found maximum of the lower dimension over single weight vectors;
// always <= set dimension, equal when there is no gap.
WeightOptimum maximize_lower_dimension(const MoranModel& ifs_model,
                                       const SimplexSearch& search = {});

// Single weight vector with upper dimension `target`, found by continuation
// from the minimizer toward a simplex corner. target must be >= min updim.
std::vector<double> weight_for_target_updim(const MoranModel& ifs_model,
                                            double target, double tol = 1e-6,
                                            const SimplexSearch& search = {});

}  // namespace morandim
