#pragma once

#include "besovwf/grid.hpp"

namespace besovwf::detail {

/// In-place unnormalized DFT over a grid's sample array.
/// sign = -1 computes Σ e^{-i2πk·m/N}, sign = +1 the conjugate sum.
void dft_inplace(std::span<cplx> data, const GridSpec& spec, int sign);

}  // namespace besovwf::detail
