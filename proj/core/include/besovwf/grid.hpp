#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace besovwf {

using cplx = std::complex<double>;
using Vec = std::vector<double>;

/// Periodic lattice on the torus [0, L)^dim with n samples per axis.
struct GridSpec {
    int dim = 1;
    std::size_t n = 64;
    double length = 2.0 * std::numbers::pi;

    /// Throws InvalidArgument unless dim ∈ {1,2}, n ≥ 16 is a power of two and length > 0.
    void validate() const;

    std::size_t size() const;
    double spacing() const { return length / static_cast<double>(n); }
    /// Physical frequency of one lattice unit, 2π/L.
    double dual_unit() const { return 2.0 * std::numbers::pi / length; }
    double nyquist() const { return dual_unit() * static_cast<double>(n) / 2.0; }
    std::array<double, 2> center() const { return {length / 2.0, length / 2.0}; }

    bool operator==(const GridSpec&) const = default;
};

/// Signed frequency index of the i-th FFT slot.
inline long signed_index(std::size_t i, std::size_t n)
{
    return i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

/// Sampled complex field, row-major over x_m = m·L/N.
class Field {
public:
    Field() = default;
    explicit Field(GridSpec spec);
    Field(GridSpec spec, std::vector<cplx> samples);

    const GridSpec& spec() const { return spec_; }
    std::span<const cplx> samples() const { return samples_; }
    std::span<cplx> samples() { return samples_; }
    std::size_t size() const { return samples_.size(); }
    cplx& operator[](std::size_t i) { return samples_[i]; }
    const cplx& operator[](std::size_t i) const { return samples_[i]; }

    /// Physical coordinate of flat index `i`.
    std::array<double, 2> position(std::size_t i) const;
    std::size_t flat(std::size_t i0, std::size_t i1 = 0) const;

    double sup_norm() const;
    bool is_real(double tol = 1e-12) const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(cplx s);

private:
    GridSpec spec_;
    std::vector<cplx> samples_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, cplx s);
/// Pointwise product.
Field multiply(const Field& a, const Field& b);

/// Fourier coefficients stored in FFT order: slot i along an axis holds
/// frequency signed_index(i, n); the physical frequency is ξ = 2πk/L.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(GridSpec spec);
    SpectralField(GridSpec spec, std::vector<cplx> coeffs);

    const GridSpec& spec() const { return spec_; }
    std::span<const cplx> coeffs() const { return coeffs_; }
    std::span<cplx> coeffs() { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    const cplx& operator[](std::size_t i) const { return coeffs_[i]; }

    /// Coefficient at signed integer frequency k (k ∈ [-N/2, N/2)).
    cplx at(long k0, long k1 = 0) const;
    std::size_t slot(long k0, long k1 = 0) const;

private:
    GridSpec spec_;
    std::vector<cplx> coeffs_;
};

/// Lattice frequencies of a grid in FFT order, in lattice units and
/// physical units. Shared by every spectral multiplier.
struct FrequencyLattice {
    GridSpec spec;
    std::vector<std::array<long, 2>> k;
    std::vector<std::array<double, 2>> xi;
    std::vector<double> modulus;  ///< |ξ| in physical units

    explicit FrequencyLattice(const GridSpec& spec);
};

/// û(k) = (L/N)^d Σ_m e^{-i2πk·m/N} u_m. Throws on non-finite samples.
SpectralField transform(const Field& f);
/// u_m = (1/L)^d Σ_k û(k) e^{i2πk·m/N}.
Field inverse(const SpectralField& F);

/// Applies a real or complex multiplier m(ξ) given per FFT slot.
Field apply_multiplier(const Field& u, std::span<const cplx> multiplier);

/// Band-limited (trigonometric) interpolant of the field at an arbitrary point.
cplx interpolate(const SpectralField& F, std::array<double, 2> x);

// ---------------------------------------------------------------------------
// Synthetic test distributions

namespace synth {

struct Delta {
    std::array<double, 2> center;
};
struct DeltaDerivative {
    std::array<double, 2> center;
    int axis = 0;
};
/// (x1²+x2²)^{1/4} (|x|^{1/2} in 1D) about `center`.
struct RadialQuarterPower {
    std::array<double, 2> center;
};
struct Weierstrass {
    double alpha = 0.5;
    std::uint64_t phase_seed = 0;
};
struct Gaussian {
    std::array<double, 2> center;
    double width = 0.3;
};
/// δ(x_axis - offset) ⊗ 1 in 2D: a line normal to `axis`.
struct LineDelta {
    int axis = 0;
    double offset = std::numbers::pi;
};
struct PlaneWave {
    std::array<long, 2> k{0, 0};
};

}  // namespace synth

using SynthKind = std::variant<synth::Delta, synth::DeltaDerivative, synth::RadialQuarterPower,
                               synth::Weierstrass, synth::Gaussian, synth::LineDelta,
                               synth::PlaneWave>;

struct SynthResult {
    Field field;
    std::vector<std::string> warnings;
};

/// Name of the alternative held by `kind` ("delta", "weierstrass", ...).
std::string kind_name(const SynthKind& kind);

SynthResult synthesize(const SynthKind& kind, const GridSpec& spec);

/// Continuum Fourier transform of a point-type synthetic object evaluated
/// at an arbitrary physical frequency, centered at `center`. Defined for
/// Delta, DeltaDerivative, RadialQuarterPower and Gaussian.
cplx continuum_transform(const SynthKind& kind, std::array<double, 2> xi, int dim);

/// Affine change of variables x ↦ A x + b on the plane (A row-major).
struct AffineMap {
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};
    std::array<double, 2> b{0.0, 0.0};

    std::array<double, 2> apply(std::array<double, 2> x) const;
    std::array<double, 2> apply_inverse(std::array<double, 2> y) const;
    double det() const { return a[0] * a[3] - a[1] * a[2]; }
    static AffineMap rotation_about(std::array<double, 2> pivot, double angle);
};

/// Samples u∘f for a point-type object u (see continuum_transform) by spectral
/// synthesis: (u∘f)^(ξ) = |det A|^{-1} e^{iξ·A^{-1}b} û(A^{-T}ξ). Only 2D.
SynthResult synthesize_pullback(const SynthKind& kind, const AffineMap& f, const GridSpec& spec);

}  // namespace besovwf
