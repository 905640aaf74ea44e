#pragma once

#include "besovwf/grid.hpp"
#include "besovwf/scaling.hpp"

#include <limits>
#include <memory>

namespace besovwf {

/// Radial local-means kernel. For s ≥ 0, κ = Δ^m ρ with m = ⌈(s+1)/2⌉, so
/// κ̌(ξ) = (-|ξ|²)^m ρ̂(ξ) vanishes to order 2m ≥ s+1 at the origin. For
/// s = -1, κ = ρ with κ̌(0) = ∫ρ > 0. ρ(r) = exp(p - p/(1-r²)) on B(0,1).
class Kernel {
public:
    struct Profile;

    int moment_order() const { return order_; }
    int laplacian_power() const { return power_; }
    int dim() const { return dim_; }
    double sharpness() const { return sharpness_; }
    /// |ξ| maximizing |κ̌| (0 for s = -1); the probe frequency of the kernel.
    double annulus_eps() const { return eps_; }
    /// Largest ε ≤ annulus_eps with |κ̌| ≥ 1e-3·max|κ̌| on ε/2 < |ξ| ≤ 2ε
    /// (0 for s = -1).
    double nonvanishing_eps() const { return nonvanishing_eps_; }

    /// κ̌ at |ξ| = modulus.
    double spectral(double modulus) const;
    /// κ(x) at |x| = r (exactly 0 for r ≥ 1).
    double spatial(double r) const;
    /// Samples y ↦ λ^{-d} κ((y - x)/λ) on the grid, measured with the periodic minimal image.
    Field sample(const GridSpec& spec, std::array<double, 2> x, double lambda) const;

private:
    friend Kernel make_kernel(int s, int dim, double sharpness);
    int order_ = -1;
    int power_ = 0;
    int dim_ = 1;
    double sharpness_ = 16.0;
    double eps_ = 0.0;
    double nonvanishing_eps_ = 0.0;
    std::shared_ptr<const Profile> profile_;
};

inline constexpr double kKernelSharpness = 16.0;

/// Throws InvalidArgument for s < -1 or dim ∉ {1,2}.
Kernel make_kernel(int s, int dim, double sharpness = kKernelSharpness);
inline Kernel make_kernel(int s, const GridSpec& spec) { return make_kernel(s, spec.dim); }

/// Decreasing scales λ ∈ (0,1).
struct LambdaLadder {
    Vec values;
};

/// Smallest admissible λ: the dilated kernel must cover 4 grid cells.
double lambda_floor(const GridSpec& spec);

/// Quarter-octave ladder λ = 2^{-k/4} with λ < 1, λ ≥ lambda_floor and the
/// probe frequency annulus_eps/λ at most `band`·Nyquist. Kernels with s = -1
/// borrow the probe frequency of the s = 1 kernel.
LambdaLadder default_ladder(const GridSpec& spec, const Kernel& k, double band = 0.6);

/// u(κ^λ_x) at every lattice point x, via (1/L)^d Σ_k û(k) κ̌(λξ_k) e^{iξ_k·x}.
Field local_mean_field(const SpectralField& U, const Kernel& k, double lambda);
Field local_mean_field(const Field& u, const Kernel& k, double lambda);
/// u(κ^λ_x) at the lattice point with flat index `x`.
cplx local_mean(const Field& u, const Kernel& k, std::size_t x, double lambda);

/// ‖u(κ̲_x)‖_p + max_λ λ^{-α} ‖u(κ^λ_x)‖_p with kernel order s = max(⌊α⌋, -1),
/// p ∈ {2, ∞} (p = 2 uses the lattice weight (L/N)^d).
double local_means_norm(const Field& u, double alpha, const LambdaLadder& ladder, double p = std::numeric_limits<double>::infinity());
/// Same with a caller-chosen kernel.
double local_means_norm(const Field& u, double alpha, const Kernel& k, const LambdaLadder& ladder, double p = std::numeric_limits<double>::infinity());

/// Fit of sup_x |u(κ^λ_x)| over the ladder.
ScalingFit local_means_exponent(const Field& u, const Kernel& k, const LambdaLadder& ladder);

}  // namespace besovwf
