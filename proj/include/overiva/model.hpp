#pragma once

// State of the OverIVA problem: per-bin demixing matrices, frequency-
// independent source variances, covariance matrices and the objective.

#include <cstddef>
#include <span>
#include <vector>

#include "overiva/exec.hpp"
#include "overiva/linalg.hpp"
#include "overiva/stft.hpp"

namespace overiva {

inline constexpr double kDefaultVarianceFloor = 1e-5;  // eps1
inline constexpr double kDefaultRidge = 1e-1;          // eps2

// W(f) = [w_1 ... w_K | W_z] per bin. targets == channels is the AuxIVA form
// (no noise block).
struct DemixingStack {
  std::size_t targets = 0;
  std::vector<CMatrix> per_bin;

  static DemixingStack identity(std::size_t bins, std::size_t channels, std::size_t targets);

  std::size_t bins() const noexcept { return per_bin.size(); }
  std::size_t channels() const noexcept { return per_bin.empty() ? 0 : per_bin.front().rows(); }
};

// lambda_k(t), K x T.
struct VarianceMap {
  std::size_t sources = 0;
  std::size_t frames = 0;
  std::vector<double> values;

  VarianceMap() = default;
  VarianceMap(std::size_t k, std::size_t t, double fill = 1.0)
      : sources(k), frames(t), values(k * t, fill) {}

  double& operator()(std::size_t k, std::size_t t) noexcept { return values[k * frames + t]; }
  double operator()(std::size_t k, std::size_t t) const noexcept { return values[k * frames + t]; }
  std::span<const double> row(std::size_t k) const noexcept {
    return {values.data() + k * frames, frames};
  }
};

struct CovarianceSet {
  std::vector<CMatrix> noise;                  // G_z(f)
  std::vector<std::vector<CMatrix>> weighted;  // G_k(f), indexed [k][f]

  // G_1(f) ... G_K(f) for one bin.
  std::vector<CMatrix> weighted_at(std::size_t f) const;
};

// s_k(f, t), K x F x T.
struct TargetSpectra {
  std::size_t sources = 0;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<cplx> values;

  TargetSpectra() = default;
  TargetSpectra(std::size_t k, std::size_t f, std::size_t t)
      : sources(k), bins(f), frames(t), values(k * f * t) {}

  cplx& operator()(std::size_t k, std::size_t f, std::size_t t) noexcept {
    return values[(k * bins + f) * frames + t];
  }
  const cplx& operator()(std::size_t k, std::size_t f, std::size_t t) const noexcept {
    return values[(k * bins + f) * frames + t];
  }
};

enum class RidgeMode {
  absolute,        // + eps2 I
  relative_trace,  // + eps2 (tr G / M) I
};

// G_z(f) = (1/T) sum_t x x^H. Upper triangle accumulated with compensated
// summation in frame order, mirrored into the lower triangle.
std::vector<CMatrix> noise_covariance(const Spectrogram& x, Exec exec = {});

// G_k(f) = (1/T) sum_t x x^H / lambda_k(t) + ridge I.
std::vector<CMatrix> weighted_covariance(const Spectrogram& x, std::span<const double> lambda_k,
                                         double ridge, RidgeMode mode = RidgeMode::absolute,
                                         Exec exec = {});

// s_k(f, t) = w_k(f)^H x(f, t) for k < sources.
TargetSpectra separate(const DemixingStack& w, const Spectrogram& x, std::size_t sources,
                       Exec exec = {});

// lambda_k(t) = max(mean_f |s_k(f, t)|^2, floor).
VarianceMap update_variances(const TargetSpectra& s, double floor);

// Rescales lambda_k by 1/c_k and w_k by c_k^{-1/2} with c_k = mean_t lambda_k(t).
// Returns the c_k.
std::vector<double> normalize_scale(DemixingStack& w, VarianceMap& lambda);

// Negative log-likelihood without the additive constant:
//   sum_{k,t} [ |s_k(t)|^2 / lambda_k(t) + F log lambda_k(t) ]
//   + sum_{f,t} |z(f,t)|^2 - 2 T sum_f log|det W(f)|
double cost_total(const DemixingStack& w, const VarianceMap& lambda, const Spectrogram& x,
                  Exec exec = {});

// Per-bin objective J_W = sum_k w_k^H G_k w_k + tr(W_z^H G_z W_z) - 2 log|det W|,
// K = weighted.size().
double cost_jw(const CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise);

struct StationarityResidual {
  double target = 0.0;  // max_k ||W^H G_k w_k - e_k||
  double noise = 0.0;   // ||W^H G_z W_z - E_z||_F
  double combined() const noexcept { return target > noise ? target : noise; }
};

StationarityResidual stationarity_residual(const CMatrix& w, std::span<const CMatrix> weighted,
                                           const CMatrix& noise);

}  // namespace overiva
