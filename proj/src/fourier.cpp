#include "fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

namespace rgsr::fm_bev::detail {

namespace {

// FFTW planning is not thread-safe; execution of private plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffers {
  int rows, cols, ccols;
  double* real;
  fftw_complex* cplx;
  fftw_plan fwd;
  fftw_plan inv;

  FftwBuffers(int r, int c) : rows(r), cols(c), ccols(c / 2 + 1) {
    real = fftw_alloc_real(static_cast<std::size_t>(rows) * cols);
    cplx = fftw_alloc_complex(static_cast<std::size_t>(rows) * ccols);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_2d(rows, cols, real, cplx, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(rows, cols, cplx, real, FFTW_ESTIMATE);
  }
  ~FftwBuffers() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(cplx);
  }
  FftwBuffers(const FftwBuffers&) = delete;
  FftwBuffers& operator=(const FftwBuffers&) = delete;
};

}  // namespace

std::vector<double> phase_correlation(const std::vector<double>& a, const std::vector<double>& b,
                                      int rows, int cols) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  FftwBuffers buf(rows, cols);
  const std::size_t nc = static_cast<std::size_t>(rows) * buf.ccols;

  std::vector<std::complex<double>> fa(nc), fb(nc);
  for (std::size_t i = 0; i < n; ++i) buf.real[i] = a[i];
  fftw_execute(buf.fwd);
  for (std::size_t i = 0; i < nc; ++i) fa[i] = {buf.cplx[i][0], buf.cplx[i][1]};
  for (std::size_t i = 0; i < n; ++i) buf.real[i] = b[i];
  fftw_execute(buf.fwd);
  for (std::size_t i = 0; i < nc; ++i) fb[i] = {buf.cplx[i][0], buf.cplx[i][1]};

  constexpr double kEps = 1e-12;
  for (std::size_t i = 0; i < nc; ++i) {
    const std::complex<double> cross = fa[i] * std::conj(fb[i]);
    const double mag = std::abs(cross);
    const std::complex<double> v = mag > kEps ? cross / mag : std::complex<double>(0.0, 0.0);
    buf.cplx[i][0] = v.real();
    buf.cplx[i][1] = v.imag();
  }
  fftw_execute(buf.inv);

  std::vector<double> surface(n);
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) surface[i] = buf.real[i] * norm;
  return surface;
}

std::vector<double> magnitude_spectrum(const std::vector<double>& img, int rows, int cols) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  FftwBuffers buf(rows, cols);
  for (std::size_t i = 0; i < n; ++i) buf.real[i] = img[i];
  fftw_execute(buf.fwd);

  // Expand the half-spectrum via Hermitian symmetry, then fftshift.
  std::vector<double> full(n, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < buf.ccols; ++c) {
      const fftw_complex& v = buf.cplx[static_cast<std::size_t>(r) * buf.ccols + c];
      const double mag = std::hypot(v[0], v[1]);
      full[static_cast<std::size_t>(r) * cols + c] = mag;
      if (c > 0 && c < cols - c) {
        const int rr = (rows - r) % rows;
        full[static_cast<std::size_t>(rr) * cols + (cols - c)] = mag;
      }
    }
  }
  std::vector<double> shifted(n);
  const int hr = rows / 2, hc = cols / 2;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      shifted[static_cast<std::size_t>((r + hr) % rows) * cols + (c + hc) % cols] =
          full[static_cast<std::size_t>(r) * cols + c];
    }
  }
  return shifted;
}

void window_image(std::vector<double>& img, int rows, int cols, bool window_rows,
                  bool window_cols) {
  double mean = 0.0;
  for (double v : img) mean += v;
  mean /= static_cast<double>(img.size());
  auto hann = [](int i, int n) {
    return 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n - 1));
  };
  for (int r = 0; r < rows; ++r) {
    const double wr = window_rows ? hann(r, rows) : 1.0;
    for (int c = 0; c < cols; ++c) {
      const double wc = window_cols ? hann(c, cols) : 1.0;
      double& v = img[static_cast<std::size_t>(r) * cols + c];
      v = (v - mean) * wr * wc;
    }
  }
}

}  // namespace rgsr::fm_bev::detail
