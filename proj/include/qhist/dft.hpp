#pragma once

#include <complex>
#include <span>

namespace qhist::dft {

enum class Direction { Forward = -1, Backward = +1 };

/// Unnormalized in-place DFT, X_m = sum_l x_l exp(dir * 2 pi i l m / n).
void transform(std::span<std::complex<double>> data, Direction dir);

}  // namespace qhist::dft
