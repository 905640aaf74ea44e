#include "besovwf/localmeans.hpp"

#include "besovwf/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace besovwf {

using std::numbers::pi;

namespace {

constexpr double kTableStep = 0.05;
constexpr double kTableMax = 200.0;
constexpr int kQuadIntervals = 2000;

double bump(double r, double p)
{
    return r < 1.0 ? std::exp(p - p / (1.0 - r * r)) : 0.0;
}

/// Radial transform ρ̂(q) tabulated on [0, kTableMax]. In 2D the bump is
/// first projected onto a line (Abel transform), whose 1D cosine transform is
/// the radial profile of the 2D transform. All integrands are even and flat at
/// the support edge, so the trapezoid rule converges spectrally.
Vec tabulate_bump_transform(int dim, double p)
{
    const double h = 1.0 / kQuadIntervals;
    Vec profile(kQuadIntervals + 1);
    for (int i = 0; i <= kQuadIntervals; ++i) {
        const double x = i * h;
        if (dim == 1) {
            profile[static_cast<std::size_t>(i)] = bump(x, p);
            continue;
        }
        const double top = std::sqrt(std::max(0.0, 1.0 - x * x));
        const int steps = kQuadIntervals;
        double acc = 0.0;
        for (int j = 0; j <= steps; ++j) {
            const double y = top * j / steps;
            acc += (j == 0 || j == steps ? 0.5 : 1.0) * bump(std::hypot(x, y), p);
        }
        profile[static_cast<std::size_t>(i)] = 2.0 * acc * top / steps;
    }
    const auto entries = static_cast<std::size_t>(std::lround(kTableMax / kTableStep)) + 1;
    Vec table(entries);
    for (std::size_t t = 0; t < entries; ++t) {
        const double q = static_cast<double>(t) * kTableStep;
        double acc = 0.0;
        for (int i = 0; i <= kQuadIntervals; ++i)
            acc += (i == 0 || i == kQuadIntervals ? 0.5 : 1.0) * profile[static_cast<std::size_t>(i)] * std::cos(q * i * h);
        table[t] = 2.0 * acc * h;
    }
    return table;
}

const Vec& bump_transform(int dim, double p)
{
    static std::mutex mutex;
    static std::map<std::pair<int, double>, Vec> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(dim, p);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, tabulate_bump_transform(dim, p)).first;
    return it->second;
}

/// Catmull-Rom interpolation of the table; zero beyond its range.
double interpolate_table(const Vec& table, double q)
{
    const double pos = q / kTableStep;
    const auto last = static_cast<double>(table.size() - 1);
    if (pos >= last) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    auto at = [&](long k) {
        if (k < 0) return table[static_cast<std::size_t>(-k)];  // even extension
        return table[std::min(static_cast<std::size_t>(k), table.size() - 1)];
    };
    const long k = static_cast<long>(i);
    const double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
    return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

/// Polynomial in (s, w) with s = r² and w = 1/(1 - s); the radial function is
/// P(s, w)·exp(p - p w).
using Poly = std::map<std::pair<int, int>, double>;

/// d/ds [P e^{-pw}] = (P_s + w² P_w - p w² P) e^{-pw}.
Poly derivative(const Poly& P, double p)
{
    Poly out;
    for (const auto& [e, c] : P) {
        const auto [i, j] = e;
        if (i > 0) out[{i - 1, j}] += c * i;
        if (j > 0) out[{i, j + 1}] += c * j;
        out[{i, j + 2}] -= p * c;
    }
    return out;
}

/// Radial Laplacian in d dimensions written in s = r²: Δ = 4s d²/ds² + 2d d/ds.
Poly laplacian(const Poly& P, double p, int dim)
{
    const Poly d1 = derivative(P, p);
    const Poly d2 = derivative(d1, p);
    Poly out;
    for (const auto& [e, c] : d2) out[{e.first + 1, e.second}] += 4.0 * c;
    for (const auto& [e, c] : d1) out[e] += 2.0 * dim * c;
    return out;
}

}  // namespace

struct Kernel::Profile {
    const Vec* transform = nullptr;
    Poly spatial;
};

Kernel make_kernel(int s, int dim, double sharpness)
{
    if (s < -1) throw InvalidArgument("make_kernel: moment order must be >= -1");
    if (dim != 1 && dim != 2) throw InvalidArgument("make_kernel: dim must be 1 or 2");
    if (!(sharpness > 0.0)) throw InvalidArgument("make_kernel: sharpness must be positive");
    Kernel k;
    k.order_ = s;
    k.power_ = s < 0 ? 0 : (s + 2) / 2;
    k.dim_ = dim;
    k.sharpness_ = sharpness;
    auto profile = std::make_shared<Kernel::Profile>();
    profile->transform = &bump_transform(dim, sharpness);
    profile->spatial = Poly{{{0, 0}, 1.0}};
    for (int i = 0; i < k.power_; ++i) profile->spatial = laplacian(profile->spatial, sharpness, dim);
    k.profile_ = std::move(profile);
    if (k.power_ > 0) {
        double best = 0.0;
        for (std::size_t t = 0; t < k.profile_->transform->size(); ++t) {
            const double q = static_cast<double>(t) * kTableStep;
            const double v = std::abs(k.spectral(q));
            if (v > best) {
                best = v;
                k.eps_ = q;
            }
        }
        for (double eps = k.eps_; eps > 0.0 && k.nonvanishing_eps_ == 0.0; eps -= kTableStep) {
            double low = best;
            for (double q = eps / 2 + kTableStep / 4; q <= 2 * eps; q += kTableStep / 4)
                low = std::min(low, std::abs(k.spectral(q)));
            if (low >= 1e-3 * best) k.nonvanishing_eps_ = eps;
        }
    }
    return k;
}

double Kernel::spectral(double modulus) const
{
    const double rho = interpolate_table(*profile_->transform, std::abs(modulus));
    const double q2 = modulus * modulus;
    double factor = 1.0;
    for (int i = 0; i < power_; ++i) factor *= -q2;
    return factor * rho;
}

double Kernel::spatial(double r) const
{
    r = std::abs(r);
    if (r >= 1.0) return 0.0;
    const double s = r * r, w = 1.0 / (1.0 - s);
    double acc = 0.0;
    for (const auto& [e, c] : profile_->spatial) acc += c * std::pow(s, e.first) * std::pow(w, e.second);
    return acc * std::exp(sharpness_ - sharpness_ * w);
}

Field Kernel::sample(const GridSpec& spec, std::array<double, 2> x, double lambda) const
{
    if (spec.dim != dim_) throw InvalidArgument("kernel: grid dimension differs from kernel dimension");
    if (!(lambda > 0.0)) throw InvalidArgument("kernel: lambda must be positive");
    Field f(spec);
    const double scale = std::pow(lambda, -dim_);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto y = f.position(i);
        double r2 = 0.0;
        for (int a = 0; a < dim_; ++a) {
            const double d = std::remainder(y[a] - x[a], spec.length);
            r2 += d * d;
        }
        f[i] = scale * spatial(std::sqrt(r2) / lambda);
    }
    return f;
}

double lambda_floor(const GridSpec& spec)
{
    return 4.0 * spec.spacing();
}

LambdaLadder default_ladder(const GridSpec& spec, const Kernel& k, double band)
{
    const double probe = k.laplacian_power() > 0 ? k.annulus_eps() : make_kernel(1, k.dim(), k.sharpness()).annulus_eps();
    const double floor = std::max(lambda_floor(spec), probe / (band * spec.nyquist()));
    LambdaLadder ladder;
    for (int step = 1;; ++step) {
        const double lambda = std::exp2(-step / 4.0);
        if (lambda < floor) break;
        ladder.values.push_back(lambda);
    }
    return ladder;
}

Field local_mean_field(const SpectralField& U, const Kernel& k, double lambda)
{
    const auto& spec = U.spec();
    if (spec.dim != k.dim()) throw InvalidArgument("local mean: grid dimension differs from kernel dimension");
    if (lambda < lambda_floor(spec) * (1.0 - 1e-12)) throw InvalidArgument("local mean: lambda below anti-aliasing floor");
    const FrequencyLattice lat(spec);
    SpectralField G(spec);
    for (std::size_t i = 0; i < G.size(); ++i) G[i] = U[i] * k.spectral(lambda * lat.modulus[i]);
    return inverse(G);
}

Field local_mean_field(const Field& u, const Kernel& k, double lambda)
{
    return local_mean_field(transform(u), k, lambda);
}

cplx local_mean(const Field& u, const Kernel& k, std::size_t x, double lambda)
{
    const auto& spec = u.spec();
    if (x >= u.size()) throw InvalidArgument("local mean: point index out of range");
    if (lambda < lambda_floor(spec) * (1.0 - 1e-12)) throw InvalidArgument("local mean: lambda below anti-aliasing floor");
    const auto U = transform(u);
    const FrequencyLattice lat(spec);
    const auto pos = u.position(x);
    cplx acc{};
    for (std::size_t i = 0; i < U.size(); ++i) {
        const double ph = lat.xi[i][0] * pos[0] + (spec.dim == 2 ? lat.xi[i][1] * pos[1] : 0.0);
        acc += U[i] * k.spectral(lambda * lat.modulus[i]) * std::polar(1.0, ph);
    }
    return acc / std::pow(spec.length, spec.dim);
}

namespace {

double field_norm(const Field& f, double p)
{
    if (std::isinf(p)) return f.sup_norm();
    double acc = 0.0;
    for (const auto& v : f.samples()) acc += std::norm(v);
    return std::sqrt(std::pow(f.spec().spacing(), f.spec().dim) * acc);
}

}  // namespace

double local_means_norm(const Field& u, double alpha, const Kernel& k, const LambdaLadder& ladder, double p)
{
    if (ladder.values.empty()) throw InvalidArgument("local_means_norm: empty ladder");
    if (!(std::isinf(p) || p == 2.0)) throw InvalidArgument("local_means_norm: p must be 2 or inf");
    const auto U = transform(u);
    const Kernel base = make_kernel(-1, u.spec().dim, k.sharpness());
    double result = field_norm(local_mean_field(U, base, 1.0), p);
    double best = 0.0;
    for (double lambda : ladder.values)
        best = std::max(best, std::pow(lambda, -alpha) * field_norm(local_mean_field(U, k, lambda), p));
    return result + best;
}

double local_means_norm(const Field& u, double alpha, const LambdaLadder& ladder, double p)
{
    const int s = std::max(static_cast<int>(std::floor(alpha)), -1);
    return local_means_norm(u, alpha, make_kernel(s, u.spec().dim), ladder, p);
}

ScalingFit local_means_exponent(const Field& u, const Kernel& k, const LambdaLadder& ladder)
{
    const auto U = transform(u);
    Vec sups;
    for (double lambda : ladder.values) sups.push_back(local_mean_field(U, k, lambda).sup_norm());
    return fit_exponent(ladder.values, sups,
                        FitOptions{.reference = std::max(u.sup_norm(), 1e-300),
                                   .cap_threshold = k.laplacian_power() > 0 ? 2.0 * k.laplacian_power() - 0.75 : kCapSlope});
}

}  // namespace besovwf
