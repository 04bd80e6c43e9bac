#include "overiva/model.hpp"

#include <cmath>
#include <string>

#include "overiva/error.hpp"
#include "parallel.hpp"

namespace overiva {

namespace {

// Neumaier-compensated accumulator for the packed upper triangle of an
// M x M Hermitian matrix.
class HermitianAccumulator {
 public:
  explicit HermitianAccumulator(std::size_t m)
      : m_(m), sum_(2 * m * (m + 1) / 2), comp_(sum_.size()) {}

  void add_outer(std::span<const cplx> x, double weight) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const cplx xi = x[i] * weight;
      for (std::size_t j = i; j < m_; ++j, idx += 2) {
        const cplx v = xi * std::conj(x[j]);
        add(idx, v.real());
        add(idx + 1, v.imag());
      }
    }
  }

  CMatrix finish(double scale) const {
    CMatrix g(m_, m_);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j, idx += 2) {
        const double re = (sum_[idx] + comp_[idx]) * scale;
        const double im = (sum_[idx + 1] + comp_[idx + 1]) * scale;
        if (i == j) {
          g(i, i) = re;
        } else {
          g(i, j) = cplx(re, im);
          g(j, i) = cplx(re, -im);
        }
      }
    }
    return g;
  }

 private:
  void add(std::size_t idx, double v) {
    double& s = sum_[idx];
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      comp_[idx] += (s - t) + v;
    } else {
      comp_[idx] += (v - t) + s;
    }
    s = t;
  }

  std::size_t m_;
  std::vector<double> sum_;
  std::vector<double> comp_;
};

void check_stack(const DemixingStack& w, const Spectrogram& x) {
  if (w.bins() != x.bins() || w.channels() != x.channels()) {
    throw Error(Errc::shape_mismatch, "demixing stack does not match the spectrogram");
  }
}

}  // namespace

DemixingStack DemixingStack::identity(std::size_t bins, std::size_t channels,
                                      std::size_t targets) {
  DemixingStack w;
  w.targets = targets;
  w.per_bin.assign(bins, CMatrix::identity(channels));
  return w;
}

std::vector<CMatrix> CovarianceSet::weighted_at(std::size_t f) const {
  std::vector<CMatrix> out;
  out.reserve(weighted.size());
  for (const auto& gk : weighted) out.push_back(gk[f]);
  return out;
}

std::vector<CMatrix> noise_covariance(const Spectrogram& x, Exec exec) {
  const std::size_t bins = x.bins();
  const std::size_t frames = x.frames();
  std::vector<CMatrix> out(bins);
  detail::for_each_bin(bins, exec, [&](std::size_t f) {
    HermitianAccumulator acc(x.channels());
    for (std::size_t t = 0; t < frames; ++t) acc.add_outer(x.frame(f, t), 1.0);
    out[f] = acc.finish(1.0 / static_cast<double>(frames));
  });
  return out;
}

std::vector<CMatrix> weighted_covariance(const Spectrogram& x, std::span<const double> lambda_k,
                                         double ridge, RidgeMode mode, Exec exec) {
  if (lambda_k.size() != x.frames()) {
    throw Error(Errc::shape_mismatch, "variance row length does not match the frame count");
  }
  const std::size_t bins = x.bins();
  const std::size_t frames = x.frames();
  const std::size_t m = x.channels();
  std::vector<double> inv(frames);
  for (std::size_t t = 0; t < frames; ++t) inv[t] = 1.0 / lambda_k[t];

  std::vector<CMatrix> out(bins);
  detail::for_each_bin(bins, exec, [&](std::size_t f) {
    HermitianAccumulator acc(m);
    for (std::size_t t = 0; t < frames; ++t) acc.add_outer(x.frame(f, t), inv[t]);
    CMatrix g = acc.finish(1.0 / static_cast<double>(frames));
    double r = ridge;
    if (mode == RidgeMode::relative_trace) {
      double tr = 0.0;
      for (std::size_t i = 0; i < m; ++i) tr += g(i, i).real();
      r = ridge * tr / static_cast<double>(m);
    }
    for (std::size_t i = 0; i < m; ++i) g(i, i) += r;
    out[f] = std::move(g);
  });
  return out;
}

TargetSpectra separate(const DemixingStack& w, const Spectrogram& x, std::size_t sources,
                       Exec exec) {
  check_stack(w, x);
  if (sources > x.channels()) throw Error(Errc::invalid_k, "more sources than channels");
  const std::size_t m = x.channels();
  TargetSpectra s(sources, x.bins(), x.frames());
  detail::for_each_bin(x.bins(), exec, [&](std::size_t f) {
    const CMatrix& wf = w.per_bin[f];
    for (std::size_t k = 0; k < sources; ++k) {
      for (std::size_t t = 0; t < x.frames(); ++t) {
        const auto xt = x.frame(f, t);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += std::conj(wf(i, k)) * xt[i];
        s(k, f, t) = acc;
      }
    }
  });
  return s;
}

VarianceMap update_variances(const TargetSpectra& s, double floor) {
  VarianceMap lambda(s.sources, s.frames);
  const double inv_bins = 1.0 / static_cast<double>(s.bins);
  for (std::size_t k = 0; k < s.sources; ++k) {
    for (std::size_t t = 0; t < s.frames; ++t) {
      double acc = 0.0;
      for (std::size_t f = 0; f < s.bins; ++f) acc += std::norm(s(k, f, t));
      lambda(k, t) = std::max(acc * inv_bins, floor);
    }
  }
  return lambda;
}

std::vector<double> normalize_scale(DemixingStack& w, VarianceMap& lambda) {
  std::vector<double> c(lambda.sources);
  for (std::size_t k = 0; k < lambda.sources; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < lambda.frames; ++t) acc += lambda(k, t);
    c[k] = acc / static_cast<double>(lambda.frames);
    for (std::size_t t = 0; t < lambda.frames; ++t) lambda(k, t) /= c[k];
    const double g = 1.0 / std::sqrt(c[k]);
    for (auto& wf : w.per_bin) {
      for (std::size_t i = 0; i < wf.rows(); ++i) wf(i, k) *= g;
    }
  }
  return c;
}

double cost_total(const DemixingStack& w, const VarianceMap& lambda, const Spectrogram& x,
                  Exec exec) {
  check_stack(w, x);
  const std::size_t k_src = w.targets;
  if (lambda.sources != k_src || lambda.frames != x.frames()) {
    throw Error(Errc::shape_mismatch, "variance map does not match the demixing stack");
  }
  const std::size_t m = x.channels();
  const std::size_t frames = x.frames();
  std::vector<double> per_bin(x.bins());
  detail::for_each_bin(x.bins(), exec, [&](std::size_t f) {
    const CMatrix& wf = w.per_bin[f];
    double acc = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      const auto xt = x.frame(f, t);
      for (std::size_t j = 0; j < m; ++j) {
        cplx y = 0.0;
        for (std::size_t i = 0; i < m; ++i) y += std::conj(wf(i, j)) * xt[i];
        acc += j < k_src ? std::norm(y) / lambda(j, t) : std::norm(y);
      }
    }
    per_bin[f] = acc - 2.0 * static_cast<double>(frames) * logabsdet(wf);
  });
  double total = 0.0;
  for (double v : per_bin) total += v;
  double logs = 0.0;
  for (double v : lambda.values) logs += std::log(v);
  return total + static_cast<double>(x.bins()) * logs;
}

double cost_jw(const CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise) {
  const std::size_t m = w.rows();
  const std::size_t k_src = weighted.size();
  if (!w.square() || k_src > m) throw Error(Errc::shape_mismatch, "cost_jw dimensions");
  double j = 0.0;
  for (std::size_t k = 0; k < k_src; ++k) j += quad_form(w.col(k), weighted[k]);
  for (std::size_t k = k_src; k < m; ++k) j += quad_form(w.col(k), noise);
  return j - 2.0 * logabsdet(w);
}

StationarityResidual stationarity_residual(const CMatrix& w, std::span<const CMatrix> weighted,
                                           const CMatrix& noise) {
  const std::size_t m = w.rows();
  const std::size_t k_src = weighted.size();
  StationarityResidual r;
  for (std::size_t k = 0; k < k_src; ++k) {
    CVector v = adjoint_matvec(w, matvec(weighted[k], w.col(k)));
    v[k] -= 1.0;
    r.target = std::max(r.target, norm(v));
  }
  if (k_src < m) {
    CMatrix d = adjoint_times(w, noise * w.col_block(k_src, m - k_src));
    for (std::size_t j = 0; j < m - k_src; ++j) d(k_src + j, j) -= 1.0;
    r.noise = d.norm();
  }
  return r;
}

}  // namespace overiva
