#include "besovwf/scaling.hpp"

#include "besovwf/error.hpp"
#include "besovwf/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace besovwf {

ScalingFit fit_exponent(std::span<const double> lambdas, std::span<const double> sups, const FitOptions& opts)
{
    if (lambdas.size() != sups.size()) throw InvalidArgument("fit: lambda and sup lists differ in length");
    ScalingFit fit;
    fit.lambdas.assign(lambdas.begin(), lambdas.end());
    fit.sups.assign(sups.begin(), sups.end());

    const double zero = opts.floor * opts.reference;
    const bool all_zero = std::all_of(sups.begin(), sups.end(), [&](double s) { return s <= zero; });
    if (!sups.empty() && all_zero) {
        fit.slope = kCapSlope;
        fit.r_squared = 1.0;
        fit.capped = true;
        return fit;
    }

    std::vector<double> x, y;
    for (std::size_t i = 0; i < sups.size(); ++i) {
        if (!(lambdas[i] > 0.0) || !(sups[i] > 0.0) || !std::isfinite(sups[i])) continue;
        x.push_back(std::log(lambdas[i]));
        y.push_back(std::log(sups[i]));
    }
    if (x.size() < opts.min_points)
        throw NumericalError("fit: need at least " + std::to_string(opts.min_points) + " nonzero samples, got "
                             + std::to_string(x.size()));

    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericalError("fit: degenerate ladder (all lambda equal)");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    if (fit.slope >= opts.cap_threshold) {
        fit.slope = kCapSlope;
        fit.capped = true;
    }
    return fit;
}

std::string fit_csv(const ScalingFit& fit)
{
    std::ostringstream os;
    os << "lambda,sup,residual\n";
    for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
        const double l = fit.lambdas[i], s = fit.sups[i];
        const double r = (l > 0 && s > 0) ? std::log(s) - (fit.intercept + fit.slope * std::log(l))
                                          : std::numeric_limits<double>::quiet_NaN();
        os << io::format_double(l) << ',' << io::format_double(s) << ',' << io::format_double(r) << '\n';
    }
    return os.str();
}

}  // namespace besovwf
