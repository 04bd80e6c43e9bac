#include "overiva/reference.hpp"

#include <cmath>

namespace overiva::reference {

std::vector<CMatrix> noise_covariance(const Spectrogram& x) {
  std::vector<double> ones(x.frames(), 1.0);
  return reference::weighted_covariance(x, std::span<const double>(ones), 0.0);
}

std::vector<CMatrix> weighted_covariance(const Spectrogram& x, std::span<const double> lambda_k,
                                         double ridge) {
  const std::size_t m = x.channels();
  std::vector<CMatrix> out;
  out.reserve(x.bins());
  for (std::size_t f = 0; f < x.bins(); ++f) {
    CMatrix g(m, m);
    for (std::size_t t = 0; t < x.frames(); ++t) {
      const auto xt = x.frame(f, t);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) g(i, j) += xt[i] * std::conj(xt[j]) / lambda_k[t];
      }
    }
    g *= 1.0 / static_cast<double>(x.frames());
    for (std::size_t i = 0; i < m; ++i) g(i, i) += ridge;
    out.push_back(std::move(g));
  }
  return out;
}

TargetSpectra separate(const DemixingStack& w, const Spectrogram& x, std::size_t sources) {
  TargetSpectra s(sources, x.bins(), x.frames());
  for (std::size_t k = 0; k < sources; ++k) {
    for (std::size_t f = 0; f < x.bins(); ++f) {
      const CVector wk = w.per_bin[f].col(k);
      for (std::size_t t = 0; t < x.frames(); ++t) s(k, f, t) = dot(wk, x.frame(f, t));
    }
  }
  return s;
}

double cost_total(const DemixingStack& w, const VarianceMap& lambda, const Spectrogram& x) {
  const std::size_t m = x.channels();
  const double bins = static_cast<double>(x.bins());
  const double frames = static_cast<double>(x.frames());
  double j = 0.0;
  for (std::size_t k = 0; k < w.targets; ++k) {
    for (std::size_t t = 0; t < x.frames(); ++t) {
      double energy = 0.0;
      for (std::size_t f = 0; f < x.bins(); ++f) {
        energy += std::norm(dot(w.per_bin[f].col(k), x.frame(f, t)));
      }
      j += energy / lambda(k, t) + bins * std::log(lambda(k, t));
    }
  }
  for (std::size_t f = 0; f < x.bins(); ++f) {
    for (std::size_t t = 0; t < x.frames(); ++t) {
      for (std::size_t c = w.targets; c < m; ++c) {
        j += std::norm(dot(w.per_bin[f].col(c), x.frame(f, t)));
      }
    }
    j -= 2.0 * frames * logabsdet(w.per_bin[f]);
  }
  return j;
}

void sweep_bins(Method method, DemixingStack& w, const CovarianceSet& cov, WzUpdate mode) {
  for (std::size_t f = 0; f < w.bins(); ++f) {
    const std::vector<CMatrix> gs = cov.weighted_at(f);
    sweep_bin(method, w.per_bin[f], gs, cov.noise[f], mode);
  }
}

}  // namespace overiva::reference
