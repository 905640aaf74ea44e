#pragma once

#include <span>
#include <string>
#include <vector>

namespace besovwf {

/// Reported slope for decay faster than anything the ladder can resolve.
inline constexpr double kCapSlope = 8.0;

/// Log-log regression of a sup-norm family against its scale parameter.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> lambdas;
    std::vector<double> sups;
    bool capped = false;
};

struct FitOptions {
    /// Values below floor·reference count as numerically zero.
    double reference = 1.0;
    double floor = 1e-12;
    /// Fitted slopes at or above this are reported as capped.
    double cap_threshold = kCapSlope;
    std::size_t min_points = 4;
};

/// Least-squares slope of log(sup) against log(lambda). Capped when every sup
/// is numerically zero or the slope reaches opts.cap_threshold; throws
/// NumericalError with fewer than opts.min_points usable samples.
ScalingFit fit_exponent(std::span<const double> lambdas, std::span<const double> sups, const FitOptions& opts = {});

/// CSV rows: lambda, sup, log-log residual against the fitted line.
std::string fit_csv(const ScalingFit& fit);

}  // namespace besovwf
