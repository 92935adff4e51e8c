#include "morandim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace morandim {

namespace {

struct FamilyStats {
    IfsFamily fam;
    double set_dim = 0.0;          // D
    double e_log_min = 0.0;        // E(log of the smallest scale per atom)
    double e_log_first = 0.0;      // E(log of the first scale)
    bool equicontractive = false;  // all scales equal within each atom
};

FamilyStats family_stats(const MoranModel& m) {
    FamilyStats st;
    st.fam = ifs_family(m);
    {
        MoranModel bare = make_independent_model(st.fam.k, st.fam.atoms, {});
        st.set_dim = hausdorff_dimension(bare, 1e-13);
    }
    st.equicontractive = true;
    for (const auto& a : st.fam.atoms) {
        double lo = *std::min_element(a.ifs.scales.begin(), a.ifs.scales.end());
        double hi = *std::max_element(a.ifs.scales.begin(), a.ifs.scales.end());
        if (hi - lo > 1e-12 * hi) st.equicontractive = false;
        st.e_log_min += a.mass * std::log(lo);
        st.e_log_first += a.mass * std::log(a.ifs.scales.front());
    }
    return st;
}

// E(log sum_i scale_i^t)
double family_pressure(const IfsFamily& fam, double t) {
    double acc = 0.0;
    for (const auto& a : fam.atoms) {
        double s = 0.0;
        for (double x : a.ifs.scales) s += std::pow(x, t);
        acc += a.mass * std::log(s);
    }
    return acc;
}

// t -> t - E(log sum scale^t) / E(log smallest scale); continuous,
// non-decreasing, equals D at t = D.
double tilt_value(const FamilyStats& st, double t) {
    return t - family_pressure(st.fam, t) / st.e_log_min;
}

// solve tilt_value(t) = d on [lo, hi] (monotone)
double solve_tilt(const FamilyStats& st, double d, double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        double v = tilt_value(st, mid);
        if (std::abs(v - d) <= 1e-13) return mid;
        (v < d ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> power_weights(const IfsAtom& atom, double t) {
    // scale_i^t / sum, computed against the largest scale so big exponents
    // do not underflow the whole row
    double lmax = -std::numeric_limits<double>::infinity();
    for (double s : atom.scales) lmax = std::max(lmax, std::log(s));
    std::vector<double> w;
    double sum = 0.0;
    for (double s : atom.scales) {
        double x = std::exp(t * (std::log(s) - lmax));
        w.push_back(x);
        sum += x;
    }
    for (double& x : w) {
        x /= sum;
        if (!(x > 0.0)) {
            throw PreconditionError(
                "target dimension too extreme: synthesized weight underflows");
        }
    }
    return w;
}

int last_min_scale_index(const IfsAtom& atom) {
    int idx = 0;
    for (std::size_t i = 1; i < atom.scales.size(); ++i) {
        if (atom.scales[i] <= atom.scales[idx]) idx = static_cast<int>(i);
    }
    return idx;
}

SynthesizedWeights finish(const FamilyStats& st,
                          std::vector<std::vector<double>> per_atom,
                          double target, WeightMechanism mech, double param,
                          bool upper, const DimOptions& opt) {
    SynthesizedWeights out;
    out.per_atom = per_atom;
    out.target = target;
    out.mechanism = mech;
    out.parameter = param;
    out.model = with_dependent_weights(st.fam, std::move(per_atom));
    out.achieved = upper ? upper_dimension(out.model, opt)
                         : lower_dimension(out.model, opt);
    if (std::abs(out.achieved - target) > 1e-6) {
        throw ConsistencyError("synthesized weights achieve " +
                               std::to_string(out.achieved) + ", wanted " +
                               std::to_string(target));
    }
    return out;
}

}  // namespace

SynthesizedWeights synthesize_upper(const MoranModel& ifs_model, double target,
                                    const DimOptions& opt) {
    if (!std::isfinite(target)) throw PreconditionError("target must be finite");
    FamilyStats st = family_stats(ifs_model);
    if (target < st.set_dim - 1e-12) {
        throw PreconditionError("target " + std::to_string(target) +
                                " below the set dimension " +
                                std::to_string(st.set_dim));
    }
    const int k = st.fam.k;
    if (st.equicontractive) {
        // corner mass q <= 1/K on the first child gives dimension
        // log(q) / E(log scale)
        double q = std::exp(target * st.e_log_first);
        if (!(q > 0.0)) {
            throw PreconditionError(
                "target dimension too extreme: corner mass underflows");
        }
        std::vector<double> w(k, (1.0 - q) / (k - 1));
        w[0] = q;
        return finish(st, std::vector<std::vector<double>>(st.fam.atoms.size(), w),
                      target, WeightMechanism::q_cap, q, /*upper=*/true, opt);
    }
    double lo = st.set_dim - 1e-6;
    double hi = std::max(st.set_dim + 1.0, 2.0 * st.set_dim);
    while (tilt_value(st, hi) < target) hi *= 2.0;
    double t = solve_tilt(st, target, lo, hi);
    std::vector<std::vector<double>> per_atom;
    for (const auto& a : st.fam.atoms) per_atom.push_back(power_weights(a.ifs, t));
    return finish(st, std::move(per_atom), target, WeightMechanism::natural_power,
                  t, /*upper=*/true, opt);
}

SynthesizedWeights synthesize_lower(const MoranModel& ifs_model, double target,
                                    const DimOptions& opt) {
    if (!std::isfinite(target) || !(target > 0.0)) {
        throw PreconditionError("target must be a positive real");
    }
    FamilyStats st = family_stats(ifs_model);
    if (target > st.set_dim + 1e-12) {
        throw PreconditionError("target " + std::to_string(target) +
                                " above the set dimension " +
                                std::to_string(st.set_dim));
    }
    const int k = st.fam.k;
    const double d_corner = -std::log(static_cast<double>(k)) / st.e_log_min;
    if (target <= d_corner + 1e-15) {
        // corner mass q >= 1/K on the smallest-scale child of every atom
        double q = std::exp(target * st.e_log_min);
        std::vector<std::vector<double>> per_atom;
        for (const auto& a : st.fam.atoms) {
            std::vector<double> w(k, (1.0 - q) / (k - 1));
            w[last_min_scale_index(a.ifs)] = q;
            per_atom.push_back(std::move(w));
        }
        return finish(st, std::move(per_atom), target, WeightMechanism::q_floor,
                      q, /*upper=*/false, opt);
    }
    double t = solve_tilt(st, target, 0.0, st.set_dim + 1e-6);
    std::vector<std::vector<double>> per_atom;
    for (const auto& a : st.fam.atoms) per_atom.push_back(power_weights(a.ifs, t));
    return finish(st, std::move(per_atom), target, WeightMechanism::natural_power,
                  t, /*upper=*/false, opt);
}

std::vector<double> natural_weights(const IfsAtom& atom, double set_dim) {
    if (!(set_dim > 0.0)) throw PreconditionError("set dimension must be positive");
    return power_weights(atom, set_dim);
}

GapVerdict detect_gap(const MoranModel& ifs_model) {
    GapVerdict v;
    IfsFamily fam = ifs_family(ifs_model);
    {
        MoranModel bare = make_independent_model(fam.k, fam.atoms, {});
        v.set_dimension = hausdorff_dimension(bare, 1e-13);
    }
    for (const auto& a : fam.atoms) {
        v.natural_weights_per_atom.push_back(natural_weights(a.ifs, v.set_dimension));
    }
    double best = 0.0;
    GapWitness w;
    for (int child = 0; child < fam.k; ++child) {
        for (std::size_t ja = 0; ja < fam.atoms.size(); ++ja) {
            for (std::size_t jb = ja + 1; jb < fam.atoms.size(); ++jb) {
                double ea = v.natural_weights_per_atom[ja][child];
                double eb = v.natural_weights_per_atom[jb][child];
                if (std::abs(ea - eb) > best + 1e-14) {
                    best = std::abs(ea - eb);
                    w = {child, static_cast<int>(ja), static_cast<int>(jb), ea, eb};
                }
            }
        }
    }
    v.has_gap = best > 1e-12;
    if (v.has_gap) {
        v.witness = w;
    } else {
        v.common_weights = v.natural_weights_per_atom.front();
    }
    return v;
}

double updim_for_weight(const MoranModel& ifs_model, std::vector<double> w,
                        const DimOptions& opt) {
    return upper_dimension(with_single_weight(ifs_family(ifs_model), std::move(w)),
                           opt);
}

double lowdim_for_weight(const MoranModel& ifs_model, std::vector<double> w,
                         const DimOptions& opt) {
    return lower_dimension(with_single_weight(ifs_family(ifs_model), std::move(w)),
                           opt);
}

// --- search over the weight simplex ------------------------------------------

namespace {

using Objective = std::function<double(const std::vector<double>&)>;

// all interior grid points i/g with i >= 1 summing to g
void simplex_grid(int k, int g, std::vector<std::vector<double>>& out) {
    std::vector<int> parts(k, 1);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == k - 1) {
            parts[pos] = left;
            std::vector<double> w(k);
            for (int i = 0; i < k; ++i) w[i] = static_cast<double>(parts[i]) / g;
            out.push_back(std::move(w));
            return;
        }
        for (int v = 1; v <= left - (k - 1 - pos); ++v) {
            parts[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, g);
}

// best objective value along w + delta * (e_to - e_from); samples then
// golden-refines the best bracket
void line_improve(const Objective& f, std::vector<double>& w, double& fw,
                  int from, int to, double floor, double tol, bool minimize) {
    double lo = -(w[to] - floor);
    double hi = w[from] - floor;
    if (hi - lo < tol) return;
    auto eval = [&](double d) {
        std::vector<double> v = w;
        v[from] -= d;
        v[to] += d;
        double y = f(v);
        return minimize ? y : -y;
    };
    const int samples = 24;
    double best_d = 0.0, best_v = minimize ? fw : -fw;
    for (int i = 0; i <= samples; ++i) {
        double d = lo + (hi - lo) * i / samples;
        double y = eval(d);
        if (y < best_v) {
            best_v = y;
            best_d = d;
        }
    }
    double a = std::max(lo, best_d - (hi - lo) / samples);
    double b = std::min(hi, best_d + (hi - lo) / samples);
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
    }
    double d = 0.5 * (a + b);
    double y = eval(d);
    if (y < best_v) {
        best_v = y;
        best_d = d;
    }
    double fin = minimize ? best_v : -best_v;
    if ((minimize && fin < fw) || (!minimize && fin > fw)) {
        w[from] -= best_d;
        w[to] += best_d;
        fw = fin;
    }
}

WeightOptimum search_simplex(const MoranModel& ifs_model, const SimplexSearch& s,
                             bool minimize) {
    IfsFamily fam = ifs_family(ifs_model);
    const int k = fam.k;
    DimOptions dopt = s.dims;
    Objective f = [&](const std::vector<double>& w) {
        MoranModel m = with_single_weight(fam, w);
        return minimize ? upper_dimension(m, dopt) : lower_dimension(m, dopt);
    };

    std::vector<std::vector<double>> candidates;
    simplex_grid(k, std::max(8, s.grid_per_dim), candidates);
    candidates.push_back(std::vector<double>(k, 1.0 / k));
    {
        MoranModel bare = make_independent_model(fam.k, fam.atoms, {});
        double d = hausdorff_dimension(bare, 1e-13);
        for (const auto& a : fam.atoms) candidates.push_back(natural_weights(a.ifs, d));
    }

    std::vector<double> best;
    double best_v = minimize ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    for (const auto& w : candidates) {
        double v = f(w);
        if ((minimize && v < best_v) || (!minimize && v > best_v)) {
            best_v = v;
            best = w;
        }
    }

    for (int sweep = 0; sweep < 64; ++sweep) {
        double before = best_v;
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                if (a == b) continue;
                line_improve(f, best, best_v, a, b, s.weight_floor, s.refine_tol,
                             minimize);
            }
        }
        if (std::abs(before - best_v) < 1e-13) break;
    }
    return {std::move(best), best_v};
}

}  // namespace

WeightOptimum minimize_upper_dimension(const MoranModel& ifs_model,
                                       const SimplexSearch& search) {
    return search_simplex(ifs_model, search, /*minimize=*/true);
}

WeightOptimum maximize_lower_dimension(const MoranModel& ifs_model,
                                       const SimplexSearch& search) {
    return search_simplex(ifs_model, search, /*minimize=*/false);
}

std::vector<double> weight_for_target_updim(const MoranModel& ifs_model,
                                            double target, double tol,
                                            const SimplexSearch& search) {
    if (!std::isfinite(target) || !(target > 0.0)) {
        throw PreconditionError("target must be a positive real");
    }
    IfsFamily fam = ifs_family(ifs_model);
    WeightOptimum opt = minimize_upper_dimension(ifs_model, search);
    if (target < opt.value - 1e-9) {
        throw PreconditionError("target " + std::to_string(target) +
                                " below the minimal upper dimension " +
                                std::to_string(opt.value));
    }
    DimOptions dopt = search.dims;
    auto m_of = [&](const std::vector<double>& w) {
        return upper_dimension(with_single_weight(fam, w), dopt);
    };
    // push one coordinate toward a tiny corner mass; the upper dimension blows
    // up there, so the target is crossed along the way
    const int k = fam.k;
    std::vector<double> corner(k, 0.0);
    int drop = static_cast<int>(std::min_element(opt.weights.begin(),
                                                 opt.weights.end()) -
                                opt.weights.begin());
    for (int i = 0; i < k; ++i) {
        if (i != drop) corner[i] = (1.0 - 1e-9) / (k - 1);
    }
    corner[drop] = 1e-9;

    auto blend = [&](double sfrac) {
        std::vector<double> w(k);
        for (int i = 0; i < k; ++i) {
            w[i] = (1.0 - sfrac) * opt.weights[i] + sfrac * corner[i];
        }
        return w;
    };
    double lo = 0.0, hi = 1.0;
    if (m_of(blend(hi)) < target) {
        throw PreconditionError("target not reachable along the corner path");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = m_of(blend(mid));
        if (std::abs(v - target) <= tol) return blend(mid);
        (v < target ? lo : hi) = mid;
    }
    return blend(0.5 * (lo + hi));
}

}  // namespace morandim
