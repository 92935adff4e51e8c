#include "morandim/dims.hpp"

#include <algorithm>
#include <cmath>

namespace morandim {

namespace {

constexpr int kMaxBisectIter = 200;

// E(log sum_i scale_i^x); strictly decreasing in x, log K at x = 0.
double pressure(const ExpandedModel& em, double x) {
    double acc = 0.0;
    for (const auto& a : em.atoms) {
        double s = 0.0;
        for (double la : a.log_scales) s += std::exp(x * la);
        acc += a.mass * std::log(s);
    }
    return acc;
}

// Boundary of a monotone predicate: true on [lo, b], false after (or the
// mirrored orientation). `true_below` tells which side is true.
template <typename Pred>
double predicate_boundary(double lo, double hi, double tol, Pred pred,
                          bool true_below) {
    for (int it = 0; it < kMaxBisectIter && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (pred(mid) == true_below) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ratio_bracket_top(const ExpandedModel& em) {
    // any selector ratio is at most max|log p| / min|log a|
    double min_abs_log_scale = std::abs(std::log(em.max_scale));
    return 1.0 + em.max_abs_log_weight / min_abs_log_scale;
}

bool enumerable(const ExpandedModel& em, std::uint64_t cap) {
    double approx = std::pow(static_cast<double>(em.k),
                             static_cast<double>(em.size()));
    return approx <= static_cast<double>(cap);
}

}  // namespace

double hausdorff_dimension(const ExpandedModel& em, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    double hi = std::log(static_cast<double>(em.k)) /
                    std::abs(std::log(em.max_scale)) +
                1.0;
    return predicate_boundary(0.0, hi, tol,
                              [&](double x) { return pressure(em, x) >= 0.0; },
                              /*true_below=*/true);
}

double hausdorff_dimension(const MoranModel& m, double tol) {
    return hausdorff_dimension(expand(m), tol);
}

namespace {

double upper_bisect(const ExpandedModel& em, double tol) {
    double hi = ratio_bracket_top(em);
    return predicate_boundary(
        0.0, hi, tol,
        [&](double psi) { return upper_ratio(em, psi).value >= psi; },
        /*true_below=*/true);
}

double lower_bisect(const ExpandedModel& em, double tol) {
    double hi = ratio_bracket_top(em);
    return predicate_boundary(
        0.0, hi, tol,
        [&](double psi) { return lower_ratio(em, psi).value <= psi; },
        /*true_below=*/false);
}

enum class Side { upper, lower };

double dimension_of(const ExpandedModel& em, const DimOptions& opt, Side side,
                    Selector* arg_out, Method* method_out) {
    Method method = opt.method;
    if (method == Method::automatic) {
        method = enumerable(em, opt.selector_cap) ? Method::both : Method::bisect;
    }
    if (method_out) *method_out = method;

    double by_bisect = 0.0, by_enum = 0.0;
    if (method == Method::bisect || method == Method::both) {
        by_bisect = side == Side::upper ? upper_bisect(em, opt.tol)
                                        : lower_bisect(em, opt.tol);
    }
    if (method == Method::enumeration || method == Method::both) {
        auto ext = selector_extremes(em, opt.selector_cap, opt.threads);
        by_enum = side == Side::upper ? ext.max_value : ext.min_value;
        if (arg_out) *arg_out = side == Side::upper ? ext.argmax : ext.argmin;
    }
    if (method == Method::both) {
        if (std::abs(by_bisect - by_enum) > 10.0 * opt.tol) {
            throw ConsistencyError(
                (side == Side::upper ? std::string("upper") : std::string("lower")) +
                " dimension methods disagree: bisect=" + std::to_string(by_bisect) +
                " enum=" + std::to_string(by_enum));
        }
        return by_enum;
    }
    return method == Method::bisect ? by_bisect : by_enum;
}

}  // namespace

double upper_dimension(const ExpandedModel& em, const DimOptions& opt) {
    return dimension_of(em, opt, Side::upper, nullptr, nullptr);
}

double lower_dimension(const ExpandedModel& em, const DimOptions& opt) {
    return dimension_of(em, opt, Side::lower, nullptr, nullptr);
}

double upper_dimension(const MoranModel& m, const DimOptions& opt) {
    return upper_dimension(expand(m), opt);
}

double lower_dimension(const MoranModel& m, const DimOptions& opt) {
    return lower_dimension(expand(m), opt);
}

std::pair<double, double> fixed_point_residual(const ExpandedModel& em, double t) {
    if (!(t >= 0.0)) throw PreconditionError("t must be >= 0");
    return {upper_ratio(em, t).value - t, lower_ratio(em, t).value - t};
}

std::pair<double, double> fixed_point_residual(const MoranModel& m, double t) {
    return fixed_point_residual(expand(m), t);
}

DimensionReport dimension_report(const MoranModel& m, const DimOptions& opt) {
    const ExpandedModel em = expand(m);
    DimensionReport rep;
    rep.set_dimension = hausdorff_dimension(em, std::min(opt.tol, 1e-12));

    Selector argmax, argmin;
    Method used = Method::bisect;
    rep.updim = dimension_of(em, opt, Side::upper, &argmax, &used);
    rep.lowdim = dimension_of(em, opt, Side::lower, &argmin, &used);
    rep.method_used = used;
    if (used != Method::bisect) {
        rep.argmax_selector = std::move(argmax);
        rep.argmin_selector = std::move(argmin);
    }
    auto [ru, rl] = fixed_point_residual(em, rep.updim);
    rep.residual_up = std::abs(ru);
    auto [ru2, rl2] = fixed_point_residual(em, rep.lowdim);
    rep.residual_low = std::abs(rl2);
    (void)rl;
    (void)ru2;

    const double slack = 1e-9;
    if (!(rep.lowdim <= rep.set_dimension + slack &&
          rep.set_dimension <= rep.updim + slack)) {
        throw ConsistencyError("dimension sandwich violated: lowdim=" +
                               std::to_string(rep.lowdim) + " D=" +
                               std::to_string(rep.set_dimension) + " updim=" +
                               std::to_string(rep.updim));
    }
    return rep;
}

}  // namespace morandim
