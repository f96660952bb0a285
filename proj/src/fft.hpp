#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fracrd::detail {

/// In-place unnormalised multidimensional DFT over a row-major array with the
/// given extents. `forward` uses the e^{-i k x} sign; the inverse is scaled by
/// 1/size so that inverse(forward(u)) == u.
///
/// Plans are created once per shape and shared; execution is thread-safe.
void fft_forward(std::span<std::complex<double>> data, const std::vector<std::size_t>& shape);
void fft_inverse(std::span<std::complex<double>> data, const std::vector<std::size_t>& shape);

}  // namespace fracrd::detail
