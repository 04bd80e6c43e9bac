#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace overiva {

// Real-input FFT of a fixed length backed by FFTW. Forward is unnormalized;
// inverse applies 1/n so inverse(forward(x)) = x. Plans are created once
// (plan creation is serialized internally); execution is reentrant, so one
// instance may be shared across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  // in: n reals, out: n/2+1 bins
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // in: n/2+1 bins, out: n reals
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

}  // namespace overiva
