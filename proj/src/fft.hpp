#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace bellforge::detail {

/// In-place centered DFT along `axis` of a row-major array with the given
/// shape. Every line along the axis (length n, even) is replaced by
///   out_k = scale * sum_j exp(sign * 2 pi i (k - n/2)(j - n/2) / n) in_j.
void centered_dft(std::span<std::complex<double>> data, std::span<const std::size_t> shape,
                  std::size_t axis, int sign, double scale);

}  // namespace bellforge::detail
