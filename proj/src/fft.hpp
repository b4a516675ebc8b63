#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mrqm::detail {

using Complex = std::complex<double>;

/// In-place 2D DFT of a row-major height x width array. The forward
/// transform is unnormalized; the inverse divides by width * height.
void fft2(std::vector<Complex>& data, std::size_t width, std::size_t height, bool inverse);

/// Moves the zero frequency to (height / 2, width / 2).
std::vector<Complex> fftshift(const std::vector<Complex>& data, std::size_t width, std::size_t height);

/// Inverse of fftshift for odd and even sizes.
std::vector<Complex> ifftshift(const std::vector<Complex>& data, std::size_t width, std::size_t height);

} // namespace mrqm::detail
