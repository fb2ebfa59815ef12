#pragma once

#include <vector>

// Internal FFT helpers over row-major double images (FFTW-backed).
namespace rgsr::fm_bev::detail {

/// Normalized cross-power phase correlation surface of (a, b), both
/// rows x cols. The peak sits at the cyclic shift d with a(x) ~ b(x - d),
/// i.e. the shift that carries b onto a.
std::vector<double> phase_correlation(const std::vector<double>& a, const std::vector<double>& b,
                                      int rows, int cols);

/// fftshift-ed magnitude spectrum of the image (DC at rows/2, cols/2).
std::vector<double> magnitude_spectrum(const std::vector<double>& img, int rows, int cols);

/// Subtract the mean and apply a separable raised-cosine window in place.
void window_image(std::vector<double>& img, int rows, int cols, bool window_rows = true,
                  bool window_cols = true);

}  // namespace rgsr::fm_bev::detail
