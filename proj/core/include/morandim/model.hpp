#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "morandim/errors.hpp"

namespace morandim {

// One finite IFS on [0,1]: K contraction ratios, optionally with explicit
// child placements (left endpoints inside the unit parent).
struct IfsAtom {
    std::vector<double> scales;
    std::vector<double> offsets;  // empty -> even-gap layout is derived
};

struct WeightAtom {
    std::vector<double> weights;
};

enum class Mode { dependent, independent };

// Dependent mode: one atom couples a scale vector with a weight vector.
// `weights` may be empty for scale-only (IFS family) models.
struct DependentAtom {
    double mass = 0.0;
    IfsAtom ifs;
    std::vector<double> weights;
};

struct MassIfs {
    double mass = 0.0;
    IfsAtom ifs;
};

struct MassWeights {
    double mass = 0.0;
    WeightAtom weights;
};

// Finite random Moran model: an atomic probability space of
// (scale vector, weight vector) pairs. In independent mode the space is the
// product of the scale-atom list and the weight-atom list.
struct MoranModel {
    int k = 0;
    Mode mode = Mode::dependent;
    std::vector<DependentAtom> atoms;        // dependent mode
    std::vector<MassIfs> ifs_atoms;          // independent mode
    std::vector<MassWeights> weight_atoms;   // independent mode, may be empty
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks every structural constraint; violations are data, not exceptions.
ValidationReport validate_model(const MoranModel& m);

// Validating factories: throw ValidationError on bad data, then normalize
// mass/weight sums exactly to 1.
MoranModel make_dependent_model(int k, std::vector<DependentAtom> atoms);
MoranModel make_independent_model(int k, std::vector<MassIfs> ifs_atoms,
                                  std::vector<MassWeights> weight_atoms);

// --- expanded (product) view -------------------------------------------------

// One expanded element of the atom space, with cached logarithms and the
// child layout used by the interval geometry.
struct ExpandedAtom {
    double mass = 0.0;
    std::vector<double> scales;
    std::vector<double> weights;  // empty if the model carries no weights
    std::vector<double> log_scales;
    std::vector<double> log_weights;
    std::vector<double> offsets;  // child left endpoints, always filled
};

struct ExpandedModel {
    int k = 0;
    bool weighted = false;
    std::vector<ExpandedAtom> atoms;
    // global constants of the family
    double min_scale = 0.0;      // A
    double max_scale = 0.0;
    double max_scale_sum = 0.0;  // B
    double tau = 0.0;            // (1 - B) / K
    double max_abs_log_weight = 0.0;  // weighted models only
    std::size_t size() const { return atoms.size(); }
};

// Expands the (possibly product) atom space. Requires a valid model;
// throws ValidationError otherwise.
ExpandedModel expand(const MoranModel& m);

// --- scale marginal ----------------------------------------------------------

// The scale-atom family with its marginal masses; the object that gap
// detection and weight synthesis act on.
struct IfsFamily {
    int k = 0;
    std::vector<MassIfs> atoms;
};

IfsFamily ifs_family(const MoranModel& m);

// Independent model with one deterministic weight vector.
MoranModel with_single_weight(const IfsFamily& fam, std::vector<double> w);
// Dependent model pairing each scale atom with its own weight vector.
MoranModel with_dependent_weights(const IfsFamily& fam,
                                  std::vector<std::vector<double>> per_atom);

// --- serialization -----------------------------------------------------------

// Parses a model document (standard or exponent-form K=2 alternative),
// validates, and normalizes. Throws ParseError / SchemaError / ValidationError.
MoranModel load_model(std::string_view text);

// Canonical JSON (sorted keys, round-trip doubles); load(save(m)) == m.
std::string save_model(const MoranModel& m);

// FNV-1a 64-bit digest of the canonicalized document, as "fnv1a64:<hex>".
std::string model_digest(const MoranModel& m);

}  // namespace morandim
