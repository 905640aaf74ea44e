#pragma once

// Independent oracles shared by the unit tests.

#include "besovwf/grid.hpp"

#include <cmath>
#include <random>

namespace oracle {

using besovwf::cplx;
using besovwf::Field;
using besovwf::GridSpec;

/// Direct O(N^{2d}) evaluation of û(k) = (L/N)^d Σ_m e^{-i2πk·m/N} u_m in FFT slot order.
inline std::vector<cplx> brute_dft(const Field& f)
{
    const auto& s = f.spec();
    const std::size_t n = s.n;
    const double w = std::pow(s.spacing(), s.dim);
    std::vector<cplx> out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double k0 = static_cast<double>(s.dim == 1 ? k : k / n);
        const double k1 = s.dim == 1 ? 0.0 : static_cast<double>(k % n);
        cplx acc{};
        for (std::size_t m = 0; m < f.size(); ++m) {
            const double m0 = static_cast<double>(s.dim == 1 ? m : m / n);
            const double m1 = s.dim == 1 ? 0.0 : static_cast<double>(m % n);
            acc += f[m] * std::polar(1.0, -2.0 * std::numbers::pi * (k0 * m0 + k1 * m1) / static_cast<double>(n));
        }
        out[k] = w * acc;
    }
    return out;
}

inline Field random_field(const GridSpec& spec, std::uint64_t seed, bool real = false)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Field f(spec);
    for (auto& v : f.samples()) v = real ? cplx(g(rng), 0.0) : cplx(g(rng), g(rng));
    return f;
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace oracle
