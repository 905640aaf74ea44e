#pragma once

#include "besovwf/grid.hpp"
#include "besovwf/scaling.hpp"

#include <limits>
#include <string>
#include <vector>

namespace besovwf {

/// Smooth radial cutoff: 1 for r ≤ 1, 0 for r ≥ 2, exp(-1/t) glue in between.
double lp_cutoff(double r);

/// Dyadic partition of unity on the frequency lattice. multipliers[j][slot]
/// holds ψ_j(ξ); ψ_0 = χ, ψ_j(ξ) = χ(2^{-j}ξ) - χ(2^{-j+1}ξ).
struct LPPartition {
    GridSpec spec;
    int top = 0;  ///< J
    std::vector<Vec> multipliers;

    /// ψ_j evaluated at an arbitrary |ξ|.
    double psi(int j, double modulus) const;
};

LPPartition build_partition(const GridSpec& spec);

/// ψ_j(D)u. Throws InvalidArgument unless 0 ≤ j ≤ J.
Field block(const Field& u, const LPPartition& part, int j);

/// Sup norm of every block, computed from one forward transform.
Vec block_sups(const Field& u, const LPPartition& part);

struct BesovParams {
    double alpha = 0.0;
    double p = std::numeric_limits<double>::infinity();
    double q = std::numeric_limits<double>::infinity();
};

/// Dyadic-block B^α_{p,q} norm with lattice quadrature weight (L/N)^{d/p}.
/// Only p, q ∈ {1, 2, ∞}.
double besov_norm(const Field& u, const LPPartition& part, const BesovParams& prm);

/// Slope of log ‖ψ_j(D)u‖_∞ against log 2^{-j} over j ∈ [2, J-2]. Capped when
/// the blocks hit the round-off floor inside that range.
ScalingFit block_exponent(const Field& u, const LPPartition& part);

/// CSV rows (j, |ξ| bin in lattice units, ψ_j) for every j and integer bin.
std::string partition_csv(const LPPartition& part);

}  // namespace besovwf
