#include "besovwf/error.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/lp.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace besovwf;
using std::numbers::pi;

namespace {

/// Direct radial quadrature of ∫ρ over B(0,1), independent of the kernel's tables.
double bump_mass(int dim, double p)
{
    const int n = 200000;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) / n;
        const double rho = std::exp(p - p / (1 - r * r));
        acc += (dim == 1 ? 2.0 : 2 * pi * r) * rho / n;
    }
    return acc;
}

/// Band-limited field with random phases and |û| ∝ ⟨k⟩^{-alpha-d}.
Field power_law_field(const GridSpec& spec, double alpha, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0, 2 * pi);
    const FrequencyLattice lat(spec);
    SpectralField F(spec);
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double k = std::hypot(lat.k[i][0], lat.k[i][1]);
        F[i] = std::polar(std::pow(1.0 + k, -alpha - spec.dim) * std::pow(spec.length, spec.dim), phase(rng));
    }
    return inverse(F);
}

}  // namespace

TEST_CASE("kernel structure")
{
    for (int dim : {1, 2}) {
        const auto plain = make_kernel(-1, dim);
        CHECK(plain.laplacian_power() == 0);
        CHECK(plain.spectral(0.0) == doctest::Approx(bump_mass(dim, kKernelSharpness)).epsilon(1e-6));
        CHECK(plain.spectral(0.0) > 0.0);
        CHECK(plain.spatial(1.0) == 0.0);
        CHECK(plain.spatial(1.5) == 0.0);
        CHECK(plain.spatial(0.0) == doctest::Approx(1.0));

        for (int s : {0, 1, 2, 3}) {
            const auto k = make_kernel(s, dim);
            CHECK(k.laplacian_power() == (s + 2) / 2);
            CHECK(k.spectral(0.0) == 0.0);
            CHECK(k.annulus_eps() > 0.0);
            const double peak = std::abs(k.spectral(k.annulus_eps()));
            for (double q = 0.05; q < 100; q += 0.05) CHECK(std::abs(k.spectral(q)) <= peak * (1 + 1e-12));
            const double eps = k.nonvanishing_eps();
            CHECK(eps > 0.0);
            double low = INFINITY;
            for (double q = eps / 2 + 1e-3; q <= 2 * eps; q += 0.01) low = std::min(low, std::abs(k.spectral(q)));
            CHECK(low >= 1e-3 * peak);
        }
    }
    CHECK_THROWS_AS(make_kernel(-2, 1), InvalidArgument);
}

TEST_CASE("kernel spatial profile agrees with its spectral profile")
{
    // κ = Δ^m ρ: the radial Laplacian of the sampled bump by finite differences.
    for (int dim : {1, 2}) {
        const auto rho = make_kernel(-1, dim);
        const auto k = make_kernel(1, dim);
        const double h = 1e-4;
        for (double r : {0.1, 0.3, 0.45}) {
            const double f0 = rho.spatial(r), fp = rho.spatial(r + h), fm = rho.spatial(r - h);
            const double lap = (fp - 2 * f0 + fm) / (h * h) + (dim - 1) / r * (fp - fm) / (2 * h);
            CHECK(k.spatial(r) == doctest::Approx(lap).epsilon(1e-5));
        }
    }
    // Zeroth moment of κ = ρ'' vanishes on the lattice.
    const GridSpec spec{1, 256, 2 * pi};
    const auto k0 = make_kernel(0, 1);
    const auto samples = k0.sample(spec, {pi, 0}, 1.0);
    double sum = 0;
    for (const auto& v : samples.samples()) sum += v.real() * spec.spacing();
    CHECK(std::abs(sum) <= 1e-10);
    // Spectral transform of the sampled kernel reproduces κ̌ mid-band.
    const auto k2 = make_kernel(2, 2);
    const GridSpec g2{2, 128, 2 * pi};
    const auto K = transform(k2.sample(g2, {0, 0}, 0.7));
    const FrequencyLattice lat(g2);
    for (std::size_t i = 0; i < K.size(); i += 131) {
        if (lat.modulus[i] > 40) continue;
        CHECK(std::abs(K[i].real() - k2.spectral(0.7 * lat.modulus[i])) <= 1e-5 * std::abs(k2.spectral(k2.annulus_eps())));
    }
}

TEST_CASE("small-frequency vanishing order")
{
    const auto k = make_kernel(2, 2);
    std::vector<double> x, y;
    for (double q = 0.05; q <= 0.4; q += 0.05) {
        x.push_back(std::log(q));
        y.push_back(std::log(std::abs(k.spectral(q))));
    }
    CHECK(oracle::slope(x, y) >= 3.0);
}

TEST_CASE("local means of deltas, plane waves and constants")
{
    const GridSpec spec{2, 256, 2 * pi};
    const auto delta = synthesize(synth::Delta{{pi, pi}}, spec).field;
    const std::size_t center = delta.flat(128, 128);
    for (int s : {-1, 1}) {
        const auto k = make_kernel(s, 2);
        for (double lambda : {0.5, 0.25}) {
            const cplx v = local_mean(delta, k, center, lambda);
            const double exact = k.spatial(0.0) / (lambda * lambda);
            CHECK(std::abs(v - exact) <= 0.02 * std::abs(exact));
        }
    }
    const auto wave = synthesize(synth::PlaneWave{{7, -3}}, spec).field;
    const auto k = make_kernel(3, 2);
    const double xi = std::hypot(7.0, 3.0);
    const auto at = wave.flat(10, 40);
    CHECK(std::abs(local_mean(wave, k, at, 0.5) - wave[at] * k.spectral(0.5 * xi)) < 1e-10);
    Field one(spec);
    for (auto& v : one.samples()) v = 1.0;
    CHECK(std::abs(local_mean(one, k, 0, 0.5)) < 1e-12);
    CHECK_THROWS_AS(local_mean(one, k, 0, 0.01), InvalidArgument);
    // Field and point evaluations agree.
    const auto u = oracle::random_field(GridSpec{2, 32, 2 * pi}, 4);
    const auto lm = local_mean_field(u, k, 0.9);
    CHECK(std::abs(lm[77] - local_mean(u, k, 77, 0.9)) < 1e-10 * lm.sup_norm());
}

TEST_CASE("vanishing moments annihilate polynomials")
{
    // Periodic trigonometric stand-ins for polynomials are not available, so
    // evaluate the pairing directly in space with the sampled kernel.
    const GridSpec spec{2, 256, 2 * pi};
    const auto k = make_kernel(2, 2);
    const auto kappa = k.sample(spec, {pi, pi}, 1.0);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
        double c[6];
        double norm = 0;
        for (double& v : c) norm = std::max(norm, std::abs(v = g(rng)));
        cplx acc{};
        for (std::size_t i = 0; i < kappa.size(); ++i) {
            const auto p = kappa.position(i);
            const double x = p[0] - pi, y = p[1] - pi;
            const double poly = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
            acc += kappa[i] * poly * spec.spacing() * spec.spacing();
        }
        CHECK(std::abs(acc) <= 1e-8 * norm);
    }
}

TEST_CASE("scaling covariance on a homogeneous spectrum")
{
    // û = |ξ|^{-5/2} in 2D: u(κ^λ_0) = λ^{1/2} u(κ^1_0) for the continuum pairing.
    const GridSpec spec{2, 512, 2 * pi};
    const FrequencyLattice lat(spec);
    SpectralField F(spec);
    for (std::size_t i = 1; i < F.size(); ++i) F[i] = std::pow(lat.modulus[i], -2.5);
    const auto k = make_kernel(3, 2);
    const auto a = local_mean_field(F, k, 0.4)[0];
    const auto b = local_mean_field(F, k, 0.2)[0];
    CHECK(std::abs(a / b) == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("fit_exponent")
{
    std::vector<double> l, s;
    for (int k = 1; k <= 8; ++k) {
        l.push_back(std::exp2(-k / 4.0));
        s.push_back(3.0 * std::pow(l.back(), 0.7));
    }
    const auto fit = fit_exponent(l, s);
    CHECK(fit.slope == doctest::Approx(0.7));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
    CHECK_FALSE(fit.capped);

    const auto zero = fit_exponent(l, std::vector<double>(l.size(), 0.0));
    CHECK(zero.capped);
    CHECK(zero.slope == kCapSlope);
    CHECK_THROWS_AS(fit_exponent(std::vector<double>{0.5, 0.25}, std::vector<double>{1.0, 2.0}), NumericalError);

    std::vector<double> steep;
    for (double v : l) steep.push_back(std::pow(v, 5.0));
    CHECK(fit_exponent(l, steep, {.cap_threshold = 3.25}).capped);
    const auto csv = fit_csv(fit);
    CHECK(csv.rfind("lambda,sup,residual\n", 0) == 0);
}

TEST_CASE("local means exponents of the example corpus")
{
    const GridSpec spec{2, 512, 2 * pi};
    const auto k = make_kernel(3, 2);
    const auto ladder = default_ladder(spec, k);
    CHECK(ladder.values.size() >= 4);
    for (double v : ladder.values) {
        CHECK(v < 1.0);
        CHECK(v >= lambda_floor(spec));
    }
    const auto delta = local_means_exponent(synthesize(synth::Delta{{pi, pi}}, spec).field, k, ladder);
    CHECK(delta.slope >= -2.2);
    CHECK(delta.slope <= -1.8);
    const auto smooth = local_means_exponent(synthesize(synth::Gaussian{{pi, pi}, 0.3}, spec).field, k, ladder);
    CHECK(smooth.capped);
}

TEST_CASE("local means exponent agrees with the block exponent on Weierstrass sums")
{
    const GridSpec spec{1, 4096, 2 * pi};
    const auto part = build_partition(spec);
    const auto k = make_kernel(1, 1);
    const auto ladder = default_ladder(spec, k);
    for (double alpha : {0.3, 0.5, 0.7}) {
        const auto u = synthesize(synth::Weierstrass{alpha, 5}, spec).field;
        const double lm = local_means_exponent(u, k, ladder).slope;
        const double lp = block_exponent(u, part).slope;
        CHECK(std::abs(lm - lp) <= 0.2);
    }
}

TEST_CASE("local means norms")
{
    std::vector<double> stable;
    for (std::size_t n : {256, 512, 1024}) {
        const GridSpec spec{1, n, 2 * pi};
        const auto u = synthesize(synth::Weierstrass{0.5, 1}, spec).field;
        stable.push_back(local_means_norm(u, 0.5, default_ladder(spec, make_kernel(0, 1))));
    }
    const auto [lo, hi] = std::minmax_element(stable.begin(), stable.end());
    CHECK(*hi <= 1.25 * *lo);

    const GridSpec spec{2, 512, 2 * pi};
    const auto delta = synthesize(synth::Delta{{pi, pi}}, spec).field;
    const auto plain = make_kernel(-1, 2);
    const auto ladder = default_ladder(spec, plain);
    auto shallow = ladder;
    shallow.values.resize(ladder.values.size() - 4);
    const double at_d = local_means_norm(delta, -2.0, ladder);
    CHECK(std::isfinite(at_d));
    CHECK(at_d <= 1.5 * local_means_norm(delta, -2.0, shallow));
    // One octave deeper (4 quarter-octave steps) multiplies the sup by ≈ 2^{0.5}.
    const double grow = local_means_norm(delta, -1.5, ladder) / local_means_norm(delta, -1.5, shallow);
    CHECK(grow == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));

    const auto gauss = synthesize(synth::Gaussian{{pi, pi}, 0.3}, spec).field;
    for (double alpha : {0.5, 2.5, 4.0}) CHECK(std::isfinite(local_means_norm(gauss, alpha, default_ladder(spec, make_kernel(3, 2)))));
    CHECK_THROWS_AS(local_means_norm(gauss, 0.5, LambdaLadder{}), InvalidArgument);
}

TEST_CASE("norm equivalence over a random power-law corpus")
{
    const GridSpec spec{2, 128, 2 * pi};
    const auto part = build_partition(spec);
    std::vector<double> ratios;
    for (int i = 0; i < 10; ++i) {
        const double alpha = -1.5 + 0.3 * i;
        const auto u = power_law_field(spec, alpha, 100 + static_cast<std::uint64_t>(i));
        const int s = std::max(static_cast<int>(std::floor(alpha)), -1);
        const double lm = local_means_norm(u, alpha, default_ladder(spec, make_kernel(s, 2)));
        ratios.push_back(lm / besov_norm(u, part, {alpha}));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo <= 50.0);
}
