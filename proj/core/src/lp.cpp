#include "besovwf/lp.hpp"

#include "besovwf/error.hpp"
#include "besovwf/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace besovwf {
namespace {

double glue(double t)
{
    return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

void check_level(const LPPartition& part, int j)
{
    if (j < 0 || j > part.top) throw InvalidArgument("lp: block index out of range");
}

double lp_norm(const Field& f, double p)
{
    const auto& spec = f.spec();
    if (std::isinf(p)) return f.sup_norm();
    const double w = std::pow(spec.spacing(), spec.dim);
    double acc = 0.0;
    for (const auto& v : f.samples()) acc += std::pow(std::abs(v), p);
    return std::pow(w * acc, 1.0 / p);
}

bool supported_exponent(double p)
{
    return p == 1.0 || p == 2.0 || std::isinf(p);
}

}  // namespace

double lp_cutoff(double r)
{
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double a = glue(2.0 - r), b = glue(r - 1.0);
    return a / (a + b);
}

double LPPartition::psi(int j, double modulus) const
{
    if (j == 0) return lp_cutoff(modulus);
    return lp_cutoff(std::ldexp(modulus, -j)) - lp_cutoff(std::ldexp(modulus, -j + 1));
}

LPPartition build_partition(const GridSpec& spec)
{
    spec.validate();
    const FrequencyLattice lat(spec);
    LPPartition part;
    part.spec = spec;
    const double top_modulus = std::sqrt(static_cast<double>(spec.dim)) * spec.nyquist();
    part.top = std::max(1, static_cast<int>(std::ceil(std::log2(top_modulus))));
    part.multipliers.assign(static_cast<std::size_t>(part.top) + 1, Vec(spec.size()));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double lower = lp_cutoff(lat.modulus[i]);  // χ(2^{-j+1}ξ) carried from the previous level
        part.multipliers[0][i] = lower;
        for (int j = 1; j <= part.top; ++j) {
            const double upper = lp_cutoff(std::ldexp(lat.modulus[i], -j));
            part.multipliers[static_cast<std::size_t>(j)][i] = upper - lower;
            lower = upper;
        }
    }
    return part;
}

Field block(const Field& u, const LPPartition& part, int j)
{
    check_level(part, j);
    if (!(u.spec() == part.spec)) throw InvalidArgument("lp: field grid differs from partition grid");
    auto F = transform(u);
    const auto& m = part.multipliers[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= m[i];
    Field out = inverse(F);
    if (u.is_real(0.0))
        for (auto& v : out.samples()) v = v.real();
    return out;
}

Vec block_sups(const Field& u, const LPPartition& part)
{
    if (!(u.spec() == part.spec)) throw InvalidArgument("lp: field grid differs from partition grid");
    const auto F = transform(u);
    Vec sups(part.multipliers.size());
    SpectralField G(part.spec);
    for (std::size_t j = 0; j < sups.size(); ++j) {
        const auto& m = part.multipliers[j];
        for (std::size_t i = 0; i < F.size(); ++i) G[i] = F[i] * m[i];
        sups[j] = inverse(G).sup_norm();
    }
    return sups;
}

double besov_norm(const Field& u, const LPPartition& part, const BesovParams& prm)
{
    if (!supported_exponent(prm.p) || !supported_exponent(prm.q))
        throw InvalidArgument("besov_norm: p and q must be 1, 2 or inf");
    if (!(u.spec() == part.spec)) throw InvalidArgument("lp: field grid differs from partition grid");
    const auto F = transform(u);
    SpectralField G(part.spec);
    double acc = 0.0;
    for (int j = 0; j <= part.top; ++j) {
        const auto& m = part.multipliers[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < F.size(); ++i) G[i] = F[i] * m[i];
        const double term = std::pow(2.0, j * prm.alpha) * lp_norm(inverse(G), prm.p);
        if (std::isinf(prm.q)) acc = std::max(acc, term);
        else acc += std::pow(term, prm.q);
    }
    return std::isinf(prm.q) ? acc : std::pow(acc, 1.0 / prm.q);
}

ScalingFit block_exponent(const Field& u, const LPPartition& part)
{
    const int lo = 2, hi = part.top - 2;
    if (hi - lo + 1 < 4) throw NumericalError("block_exponent: fewer than 4 usable levels");
    const Vec sups = block_sups(u, part);
    Vec lambdas, used;
    const double reference = std::max(u.sup_norm(), 1e-300);
    for (int j = lo; j <= hi; ++j) {
        lambdas.push_back(std::ldexp(1.0, -j));
        used.push_back(sups[static_cast<std::size_t>(j)]);
    }
    // Decay that reaches round-off inside the fit range outruns every finite exponent.
    if (used.back() <= 1e-12 * reference) {
        ScalingFit fit;
        fit.lambdas = lambdas;
        fit.sups = used;
        fit.slope = kCapSlope;
        fit.r_squared = 1.0;
        fit.capped = true;
        return fit;
    }
    return fit_exponent(lambdas, used, FitOptions{.reference = reference});
}

std::string partition_csv(const LPPartition& part)
{
    std::ostringstream os;
    os << "j,xi_bin,psi\n";
    const std::size_t bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(part.spec.dim))
                                                                * static_cast<double>(part.spec.n) / 2.0));
    for (int j = 0; j <= part.top; ++j)
        for (std::size_t b = 0; b <= bins; ++b)
            os << j << ',' << b << ','
               << io::format_double(part.psi(j, static_cast<double>(b) * part.spec.dual_unit())) << '\n';
    return os.str();
}

}  // namespace besovwf
