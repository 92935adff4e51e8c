#include "morandim/k2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <tuple>

#include "morandim/selectors.hpp"

namespace morandim::k2 {

namespace {

constexpr double kTieRel = 1e-12;

double diff(const K2Spec& s, int i) { return s.beta[i] - s.alpha[i]; }

// difference treated as zero (left and right exponents coincide)
bool diff_is_zero(const K2Spec& s, int i) {
    return std::abs(diff(s, i)) <= kTieRel * std::max(1.0, s.alpha[i] + s.beta[i]);
}

// sentinel-extended difference for curve adjacency, j = 0..L+1
double dval(const K2Spec& s, int j) {
    if (j == 0) return std::numeric_limits<double>::infinity();
    if (j == s.size() + 1) return -std::numeric_limits<double>::infinity();
    return diff(s, j - 1);
}

bool tied(double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= kTieRel * std::max({1.0, std::abs(x), std::abs(y)});
}

// Curve j is present iff its condition window is nonempty for some theta,
// i.e. the neighbouring differences are distinct. Equal consecutive
// differences remove the curve between them and adjacency skips it.
std::vector<int> present_curves(const K2Spec& s) {
    std::vector<int> out;
    for (int j = 0; j <= s.size(); ++j) {
        if (!tied(dval(s, j + 1), dval(s, j))) out.push_back(j);
    }
    return out;
}

void finalize(K2Spec& s) {
    const int l = s.size();
    // sort by (beta - alpha) non-increasing
    std::vector<int> order(l);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return diff(s, a) > diff(s, b);
    });
    // near-tied differences are functionally interchangeable; order them by
    // (alpha, beta, mass) so the layout survives conversion round-trips
    for (int lo = 0; lo < l;) {
        int hi = lo + 1;
        while (hi < l && tied(diff(s, order[hi]), diff(s, order[hi - 1]))) ++hi;
        std::sort(order.begin() + lo, order.begin() + hi, [&](int a, int b) {
            return std::tie(s.alpha[a], s.beta[a], s.mass[a]) <
                   std::tie(s.alpha[b], s.beta[b], s.mass[b]);
        });
        lo = hi;
    }
    K2Spec t = s;
    for (int i = 0; i < l; ++i) {
        t.alpha[i] = s.alpha[order[i]];
        t.beta[i] = s.beta[order[i]];
        t.mass[i] = s.mass[order[i]];
    }
    s = std::move(t);

    s.n_nonneg = 0;
    for (int i = 0; i < l; ++i) {
        if (diff(s, i) > 0.0 || diff_is_zero(s, i)) s.n_nonneg = i + 1;
    }

    s.cum_mass.assign(l + 1, 0.0);
    s.mean_exponent.assign(l + 1, 0.0);
    for (int j = 0; j <= l; ++j) {
        double sm = 0.0, te = 0.0;
        for (int i = 0; i < l; ++i) {
            if (i < j) {
                sm += s.mass[i];
                te += s.alpha[i] * s.mass[i];
            } else {
                te += s.beta[i] * s.mass[i];
            }
        }
        s.cum_mass[j] = sm;
        s.mean_exponent[j] = te;
    }
}

}  // namespace

K2Spec make_spec(double base, std::vector<double> alpha,
                 std::vector<double> beta, std::vector<double> mass) {
    if (!(base > 0.0 && base < 1.0))
        throw PreconditionError("base must lie in (0,1)");
    if (alpha.size() != beta.size() || alpha.size() != mass.size())
        throw ValidationError("alpha/beta/mass length mismatch");
    if (alpha.empty()) throw ValidationError("empty exponent lists");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0) || !(beta[i] > 0.0))
            throw ValidationError("exponents must be positive");
        if (!(mass[i] > 0.0)) throw ValidationError("masses must be positive");
        if (!(std::pow(base, alpha[i]) + std::pow(base, beta[i]) < 1.0))
            throw ValidationError("scale sum >= 1 for exponent pair " +
                                  std::to_string(i));
    }
    double msum = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (std::abs(msum - 1.0) > 1e-12)
        throw ValidationError("masses sum " + std::to_string(msum) + " != 1");
    for (double& m : mass) m /= msum;

    K2Spec s;
    s.base = base;
    s.alpha = std::move(alpha);
    s.beta = std::move(beta);
    s.mass = std::move(mass);
    finalize(s);

    if (s.n_nonneg == 0) {
        std::swap(s.alpha, s.beta);
        s.mirrored = true;
        finalize(s);
    }
    return s;
}

K2Spec from_model(const MoranModel& m, double base) {
    if (m.k != 2) throw PreconditionError("exponent form needs K = 2");
    if (m.mode != Mode::independent || m.weight_atoms.size() > 1)
        throw PreconditionError(
            "exponent form needs an independent model with at most one weight atom");
    const double lb = std::log(base);
    std::vector<double> alpha, beta, mass;
    for (const auto& a : m.ifs_atoms) {
        alpha.push_back(std::log(a.ifs.scales[0]) / lb);
        beta.push_back(std::log(a.ifs.scales[1]) / lb);
        mass.push_back(a.mass);
    }
    return make_spec(base, std::move(alpha), std::move(beta), std::move(mass));
}

MoranModel to_model(const K2Spec& spec) {
    std::vector<MassIfs> ifs;
    for (int i = 0; i < spec.size(); ++i) {
        MassIfs a;
        a.mass = spec.mass[i];
        a.ifs.scales = {std::pow(spec.base, spec.alpha[i]),
                        std::pow(spec.base, spec.beta[i])};
        ifs.push_back(std::move(a));
    }
    return make_independent_model(2, std::move(ifs), {});
}

double DimensionCurve::operator()(double p) const {
    return (cum_mass * std::log(p) + (1.0 - cum_mass) * std::log1p(-p)) /
           (mean_exponent * log_base);
}

DimensionCurve curve(const K2Spec& spec, int j) {
    if (j < 0 || j > spec.size()) throw PreconditionError("curve index out of range");
    return {j, spec.cum_mass[j], spec.mean_exponent[j], std::log(spec.base)};
}

double f_curve(const K2Spec& spec, int j, double p) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("p must lie in (0,1)");
    return curve(spec, j)(p);
}

double condition_boundary(const K2Spec& spec, int j, double p) {
    if (j < 1 || j > spec.size()) throw PreconditionError("curve index out of range");
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("p must lie in (0,1)");
    if (diff_is_zero(spec, j - 1)) return std::numeric_limits<double>::infinity();
    return std::log((1.0 - p) / p) / (diff(spec, j - 1) * std::log(spec.base));
}

double updim_at(const K2Spec& spec, double p) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("p must lie in (0,1)");
    if (p == 0.5) return f_curve(spec, spec.n_nonneg, p);
    double best = -std::numeric_limits<double>::infinity();
    for (int j : present_curves(spec)) {
        bool feasible;
        if (p < 0.5) {
            feasible = j >= spec.n_nonneg;
        } else {
            feasible = j == 0 || (diff(spec, j - 1) > 0.0 && !diff_is_zero(spec, j - 1));
        }
        if (feasible) best = std::max(best, f_curve(spec, j, p));
    }
    return best;
}

// --- transition-following minimization ---------------------------------------

namespace {

// f_i - f_j in the form (u log p + v log(1-p)) / log base; at most one
// interior critical point, so at most two roots.
struct CurveDiff {
    double u, v, log_base;
    double operator()(double p) const {
        return (u * std::log(p) + v * std::log1p(-p)) / log_base;
    }
    std::optional<double> critical() const {
        double denom = u + v;
        if (denom == 0.0) return std::nullopt;
        double pc = u / denom;
        if (pc > 0.0 && pc < 1.0) return pc;
        return std::nullopt;
    }
};

CurveDiff curve_diff(const K2Spec& s, int i, int j) {
    const double si = s.cum_mass[i], sj = s.cum_mass[j];
    const double ti = s.mean_exponent[i], tj = s.mean_exponent[j];
    return {si / ti - sj / tj, (1.0 - si) / ti - (1.0 - sj) / tj,
            std::log(s.base)};
}

double bisect_root(const CurveDiff& g, double lo, double hi, double tol) {
    double flo = g(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// roots of g on [lo, hi], split at the critical point into monotone pieces
std::vector<double> roots_in(const CurveDiff& g, double lo, double hi,
                             double tol) {
    std::vector<double> cuts{lo};
    if (auto pc = g.critical(); pc && *pc > lo && *pc < hi) cuts.push_back(*pc);
    cuts.push_back(hi);
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double fa = g(a), fb = g(b);
        if (fa == 0.0) out.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            out.push_back(bisect_root(g, a, b, tol));
        }
    }
    double fhi = g(hi);
    if (fhi == 0.0) out.push_back(hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Descent {
    double p_star = 0.0, d_star = 0.0;
    MinTrace trace;
};

struct WalkOverrun : ConsistencyError {
    using ConsistencyError::ConsistencyError;
};

int next_present(const std::vector<int>& pres, int j) {
    auto it = std::upper_bound(pres.begin(), pres.end(), j);
    return it == pres.end() ? -1 : *it;
}

int prev_present(const std::vector<int>& pres, int j) {
    auto it = std::lower_bound(pres.begin(), pres.end(), j);
    return it == pres.begin() ? -1 : *(it - 1);
}

// follow the top curve leftwards from p_cur; curve index only increases
Descent descend_left(const K2Spec& s, const std::vector<int>& pres, int i,
                     double p_cur, double root_tol) {
    Descent d;
    for (int guard = 0; guard <= s.size() + 2; ++guard) {
        d.trace.curves.push_back(i);
        const double vertex = s.cum_mass[i];
        int nxt = next_present(pres, i);
        std::optional<double> b;
        if (nxt >= 0 && vertex < p_cur) {
            auto roots = roots_in(curve_diff(s, i, nxt), vertex, p_cur, root_tol);
            if (!roots.empty()) b = roots.back();  // the largest one
        }
        if (!b) {
            d.p_star = vertex;
            d.d_star = f_curve(s, i, vertex);
            d.trace.stop_rule = "vertex";
            return d;
        }
        d.trace.transitions.push_back({*b, i, nxt, Side::left});
        if (*b <= s.cum_mass[nxt]) {  // adjacent curve decreasing: done
            d.p_star = *b;
            d.d_star = f_curve(s, i, *b);
            d.trace.stop_rule = "crossing";
            return d;
        }
        i = nxt;
        p_cur = *b;
    }
    throw WalkOverrun("transition walk failed to terminate");
}

// follow the top curve rightwards from p_cur; curve index only decreases
Descent descend_right(const K2Spec& s, const std::vector<int>& pres, int i,
                      double p_cur, double root_tol) {
    Descent d;
    for (int guard = 0; guard <= s.size() + 2; ++guard) {
        d.trace.curves.push_back(i);
        const double vertex = s.cum_mass[i];
        const double hi = std::min(vertex, 1.0 - 1e-12);
        int prv = prev_present(pres, i);
        std::optional<double> b;
        if (prv >= 0 && p_cur < hi) {
            auto roots = roots_in(curve_diff(s, i, prv), p_cur, hi, root_tol);
            if (!roots.empty()) b = roots.front();  // the smallest one
        }
        if (!b) {
            if (vertex >= 1.0) {
                throw WalkOverrun("missing right transition before p = 1");
            }
            d.p_star = vertex;
            d.d_star = f_curve(s, i, vertex);
            d.trace.stop_rule = "vertex";
            return d;
        }
        d.trace.transitions.push_back({*b, i, prv, Side::right});
        if (*b >= s.cum_mass[prv]) {  // adjacent curve increasing: done
            d.p_star = *b;
            d.d_star = f_curve(s, i, *b);
            d.trace.stop_rule = "crossing";
            return d;
        }
        i = prv;
        p_cur = *b;
    }
    throw WalkOverrun("transition walk failed to terminate");
}

double unmirror(const K2Spec& s, double p) { return s.mirrored ? 1.0 - p : p; }

// Verify d_star against the expectation-ratio fixed point G_p(d) = d.
void check_fixed_point(const K2Spec& s, double p_internal, double d_star) {
    MoranModel m = to_model(s);
    MoranModel weighted =
        with_single_weight(ifs_family(m), {p_internal, 1.0 - p_internal});
    const ExpandedModel em = expand(weighted);
    double residual = upper_ratio(em, d_star).value - d_star;
    if (std::abs(residual) > 1e-8) {
        throw ConsistencyError("minimum fails the fixed-point check, residual " +
                               std::to_string(residual));
    }
}

MinResult minimize_by_walk(const K2Spec& spec, double root_tol) {
    const auto pres = present_curves(spec);
    const int n = spec.n_nonneg;

    // start curves at p = 1/2: with a zero difference at N the two equal-value
    // curves are the last zero-block curve (left side) and the present curve
    // just below the block (right side); otherwise both are curve N
    int first_zero = -1;
    for (int i = 0; i < spec.size(); ++i) {
        if (diff_is_zero(spec, i)) {
            first_zero = i + 1;  // curve indexing
            break;
        }
    }
    const int j_left = n;
    const int j_right = first_zero < 0 ? n : first_zero - 1;

    Descent d;
    if (spec.cum_mass[j_right] > 0.5) {
        d = descend_right(spec, pres, j_right, 0.5, root_tol);
    } else if (spec.cum_mass[j_left] < 0.5) {
        d = descend_left(spec, pres, j_left, 0.5, root_tol);
    } else {
        d.p_star = 0.5;
        d.d_star = f_curve(spec, n, 0.5);
        d.trace.curves.push_back(n);
        d.trace.stop_rule = "center";
    }

    check_fixed_point(spec, d.p_star, d.d_star);

    MinResult out;
    out.d_star = d.d_star;
    out.p_star = unmirror(spec, d.p_star);
    out.trace = std::move(d.trace);
    return out;
}

}  // namespace

MinResult minimize_by_transitions(const K2Spec& spec, double root_tol) {
    try {
        return minimize_by_walk(spec, root_tol);
    } catch (const WalkOverrun&) {
        MinResult out = minimize_by_grid(spec);
        out.trace.stop_rule = "grid-fallback";
        return out;
    }
}

namespace {

std::pair<double, double> golden_min(const K2Spec& s, double a, double b,
                                     double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = updim_at(s, x1), f2 = updim_at(s, x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = updim_at(s, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = updim_at(s, x2);
        }
    }
    double xm = 0.5 * (a + b);
    return {xm, updim_at(s, xm)};
}

}  // namespace

MinResult minimize_by_grid(const K2Spec& spec, int n_grid, double refine_tol) {
    if (n_grid < 1000) throw PreconditionError("n_grid must be >= 1000");
    const double eps = 1e-6;
    double best_p = 0.5, best_v = updim_at(spec, 0.5);

    // M is strictly convex on each side of 1/2, so refine each side separately
    auto half = [&](double lo, double hi) {
        const int n = n_grid / 2;
        int best_i = 0;
        double bv = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            double p = lo + (hi - lo) * i / n;
            double v = updim_at(spec, p);
            if (v < bv) {
                bv = v;
                best_i = i;
            }
        }
        double a = lo + (hi - lo) * std::max(0, best_i - 1) / n;
        double b = lo + (hi - lo) * std::min(n, best_i + 1) / n;
        auto [p, v] = golden_min(spec, a, b, refine_tol);
        if (v < best_v) {
            best_v = v;
            best_p = p;
        }
    };
    half(eps, 0.5);
    half(0.5, 1.0 - eps);

    MinResult out;
    out.p_star = unmirror(spec, best_p);
    out.d_star = best_v;
    out.trace.stop_rule = "grid";
    return out;
}

TwoIfsResult two_ifs_minimum(const K2Spec& spec) {
    if (spec.size() != 2) throw PreconditionError("closed form needs exactly two IFSs");
    if (std::abs(spec.mass[0] - 0.5) > 1e-12 || std::abs(spec.mass[1] - 0.5) > 1e-12)
        throw PreconditionError("closed form needs equally likely IFSs");
    const double d1 = diff(spec, 0), d2 = diff(spec, 1);
    const bool z2 = diff_is_zero(spec, 1);
    if (!(d1 > d2) || tied(d1, d2))
        throw PreconditionError("closed form needs distinct exponent differences");
    const double abs_log_a = std::abs(std::log(spec.base));

    TwoIfsResult out;
    if (z2) {
        out.tag = TwoIfsCase::equal_pair;
        out.d_star = 2.0 * std::log(2.0) / ((spec.alpha[0] + spec.alpha[1]) * abs_log_a);
        out.p_star = unmirror(spec, 0.5);
        return out;
    }
    if (d2 > 0.0) {
        out.tag = TwoIfsCase::both_nonneg;
        const double c = (spec.alpha[0] + spec.alpha[1]) * abs_log_a;
        auto h = [&](double th) {
            return th - 2.0 * std::log1p(std::pow(spec.base, d2 * th)) / c;
        };
        double lo = 0.0, hi = 2.0 * std::log(2.0) / c;
        for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            double mid = 0.5 * (lo + hi);
            (h(mid) < 0.0 ? lo : hi) = mid;
        }
        const double theta0 = 0.5 * (lo + hi);
        out.d_star = theta0;
        out.p_star = unmirror(spec, 1.0 / (1.0 + std::pow(spec.base, d2 * theta0)));
        return out;
    }
    // d1 >= 0 > d2
    out.tag = TwoIfsCase::split_sign;
    out.d_star = 2.0 * std::log(2.0) / ((spec.alpha[0] + spec.beta[1]) * abs_log_a);
    out.p_star = unmirror(spec, 0.5);
    return out;
}

CurveTable curve_table(const K2Spec& spec, int n_points) {
    if (n_points < 2) throw PreconditionError("need at least two grid points");
    CurveTable t;
    t.f.resize(spec.size() + 1);
    for (int row = 0; row < n_points; ++row) {
        double p = 0.001 + 0.998 * row / (n_points - 1);
        t.p.push_back(p);
        for (int j = 0; j <= spec.size(); ++j) t.f[j].push_back(f_curve(spec, j, p));
        t.m.push_back(updim_at(spec, p));
    }
    return t;
}

void write_curve_table_csv(const CurveTable& table, std::ostream& os) {
    os << "p";
    for (std::size_t j = 0; j < table.f.size(); ++j) os << ",f" << j;
    os << ",M\n";
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.12g", x);
        os << buf;
    };
    for (std::size_t r = 0; r < table.p.size(); ++r) {
        put(table.p[r]);
        for (const auto& col : table.f) {
            os << ',';
            put(col[r]);
        }
        os << ',';
        put(table.m[r]);
        os << '\n';
    }
}

}  // namespace morandim::k2
