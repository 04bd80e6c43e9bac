#include "overiva/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <vector>

#include "overiva/error.hpp"

namespace overiva {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2) throw Error(Errc::invalid_argument, "FFT length must be >= 2");
  const int len = static_cast<int>(n);
  std::lock_guard<std::mutex> lock(planner_mutex());
  double* re = fftw_alloc_real(n);
  fftw_complex* co = fftw_alloc_complex(n / 2 + 1);
  plans_->forward = fftw_plan_dft_r2c_1d(len, re, co, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->inverse = fftw_plan_dft_c2r_1d(len, co, re, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(re);
  fftw_free(co);
}

RealFft::~RealFft() {
  if (!plans_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw Error(Errc::shape_mismatch, "fft forward");
  // c2r destroys its input and r2c wants a writable one; copy into scratch.
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(plans_->forward, scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw Error(Errc::shape_mismatch, "fft inverse");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  std::transform(out.begin(), out.end(), out.begin(), [scale](double v) { return v * scale; });
}

}  // namespace overiva
