#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "morandim/model.hpp"

namespace morandim::k2 {

// Exponent form of a K=2 scale family: the i'th IFS contracts by
// base^alpha[i] on the left and base^beta[i] on the right. Atoms are sorted
// by (beta - alpha) non-increasing; if every difference is negative the two
// sides are swapped and `mirrored` records that reported weights must be
// reflected back to the caller's orientation.
struct K2Spec {
    double base = 0.5;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> mass;
    bool mirrored = false;
    int n_nonneg = 0;                    // count of (beta - alpha) >= 0
    std::vector<double> cum_mass;        // S_j,  j = 0..L
    std::vector<double> mean_exponent;   // T_j,  j = 0..L

    int size() const { return static_cast<int>(alpha.size()); }
};

K2Spec make_spec(double base, std::vector<double> alpha,
                 std::vector<double> beta, std::vector<double> mass);

// Exponent form of a K=2 independent model (single weight atom or none).
K2Spec from_model(const MoranModel& m, double base = 0.5);

// The scale-only independent model the spec describes.
MoranModel to_model(const K2Spec& spec);

// One candidate dimension curve: f_j(p) = (S_j log p + (1-S_j) log(1-p)) /
// (T_j log base). Strictly convex, minimal at p = S_j.
struct DimensionCurve {
    int j = 0;
    double cum_mass = 0.0;       // S_j
    double mean_exponent = 0.0;  // T_j
    double log_base = 0.0;
    double operator()(double p) const;
};

DimensionCurve curve(const K2Spec& spec, int j);
double f_curve(const K2Spec& spec, int j, double p);

// The theta above (p > 1/2) or below (p < 1/2) which curve j stops being the
// active branch of the theta-indexed expectation ratio at weight (p, 1-p);
// +infinity when the j'th exponent difference vanishes.
double condition_boundary(const K2Spec& spec, int j, double p);

// M(p): the almost-sure upper dimension of the random measure with single
// weight (p, 1-p), as the max of the curves feasible at p.
double updim_at(const K2Spec& spec, double p);

enum class Side { left, right };

struct TransitionPoint {
    double b = 0.0;
    int from_j = 0;
    int to_j = 0;
    Side side = Side::left;
};

struct MinTrace {
    std::vector<int> curves;  // visited, in order
    std::vector<TransitionPoint> transitions;
    std::string stop_rule;    // "center" | "vertex" | "crossing" | "grid"
};

struct MinResult {
    double p_star = 0.0;  // reported in the caller's orientation
    double d_star = 0.0;
    MinTrace trace;
};

// Follows the top curve from p = 1/2 through its transitions until the
// minimum of M is bracketed. Cross-checked internally against the fixed
// point of the expectation-ratio machinery.
MinResult minimize_by_transitions(const K2Spec& spec, double root_tol = 1e-12);

// Dense-grid + golden-section cross-check; M is strictly convex on each side
// of 1/2.
MinResult minimize_by_grid(const K2Spec& spec, int n_grid = 2000,
                           double refine_tol = 1e-10);

enum class TwoIfsCase { split_sign, both_nonneg, equal_pair };

struct TwoIfsResult {
    double p_star = 0.0;
    double d_star = 0.0;
    TwoIfsCase tag = TwoIfsCase::split_sign;
};

// Closed form for exactly two equally likely IFSs.
TwoIfsResult two_ifs_minimum(const K2Spec& spec);

struct CurveTable {
    std::vector<double> p;                   // grid on (0.001, 0.999)
    std::vector<std::vector<double>> f;      // f[j][row], j = 0..L
    std::vector<double> m;                   // M(p) per row
};

CurveTable curve_table(const K2Spec& spec, int n_points);

// Header "p,f0,...,fL,M", 12 significant digits, newline-terminated rows.
void write_curve_table_csv(const CurveTable& table, std::ostream& os);

}  // namespace morandim::k2
