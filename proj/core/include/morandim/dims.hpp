#pragma once

#include <optional>
#include <utility>

#include "morandim/model.hpp"
#include "morandim/selectors.hpp"

namespace morandim {

enum class Method { bisect, enumeration, both, automatic };

struct DimOptions {
    Method method = Method::automatic;  // both when enumerable, else bisect
    double tol = 1e-10;
    std::uint64_t selector_cap = kDefaultSelectorCap;
    int threads = 1;
};

// Almost-sure Hausdorff dimension of the random set: the root of
// E(log sum_i scale_i^x) = 0, located by bisection.
double hausdorff_dimension(const MoranModel& m, double tol = 1e-12);
double hausdorff_dimension(const ExpandedModel& em, double tol = 1e-12);

// Almost-sure upper / lower dimension of the random measure.
double upper_dimension(const MoranModel& m, const DimOptions& opt = {});
double lower_dimension(const MoranModel& m, const DimOptions& opt = {});
double upper_dimension(const ExpandedModel& em, const DimOptions& opt = {});
double lower_dimension(const ExpandedModel& em, const DimOptions& opt = {});

// Signed residuals (upper_ratio(t) - t, lower_ratio(t) - t); both vanish
// exactly at the respective dimension.
std::pair<double, double> fixed_point_residual(const MoranModel& m, double t);
std::pair<double, double> fixed_point_residual(const ExpandedModel& em, double t);

struct DimensionReport {
    double set_dimension = 0.0;
    double updim = 0.0;
    double lowdim = 0.0;
    Method method_used = Method::bisect;
    double residual_up = 0.0;
    double residual_low = 0.0;
    std::optional<Selector> argmax_selector;
    std::optional<Selector> argmin_selector;
};

DimensionReport dimension_report(const MoranModel& m, const DimOptions& opt = {});

}  // namespace morandim
