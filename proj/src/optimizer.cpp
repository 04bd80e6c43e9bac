#include "overiva/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "overiva/error.hpp"
#include "parallel.hpp"

namespace overiva {

namespace {

class Stopwatch {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  void stop() {
    elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
  }
  double seconds() const { return elapsed_; }

 private:
  std::chrono::steady_clock::time_point begin_{};
  double elapsed_ = 0.0;
};

// All-zero G_z: the bin carries no signal and the W_z block is unconstrained.
bool silent(const CMatrix& noise) { return noise.max_abs() == 0.0; }

void refresh_wz(CMatrix& w, const CMatrix& noise, std::size_t targets, WzUpdate mode,
                double* oc) {
  const std::size_t m = w.rows();
  if (targets >= m || silent(noise)) return;
  if (mode == WzUpdate::fast) {
    w.set_col_block(targets, update_wz_fast(w.col_block(0, targets), noise));
  } else {
    w.set_col_block(targets, update_wz_full(w, noise, targets));
  }
  if (oc) *oc = std::max(*oc, oc_residual(w, noise, targets));
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::auxiva: return "auxiva";
    case Method::ip1: return "ip1";
    case Method::ip2: return "ip2";
    case Method::ip3: return "ip3";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::auxiva, Method::ip1, Method::ip2, Method::ip3}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::size_t default_iterations(Method m) noexcept { return m == Method::ip2 ? 3 : 50; }

void RunConfig::validate() const {
  if (iterations < 1) throw Error(Errc::invalid_argument, "iterations must be >= 1");
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
    throw Error(Errc::invalid_argument, "eps1 and eps2 must be positive");
  }
  if (exec.threads < 1) throw Error(Errc::invalid_argument, "threads must be >= 1");
  if (convergence_delta && !(*convergence_delta >= 0.0)) {
    throw Error(Errc::invalid_argument, "convergence delta must be non-negative");
  }
}

// ---------------------------------------------------------------------------
// Single-bin updates

CVector ip0_update_row(const CMatrix& w, const CMatrix& g, std::size_t k) {
  const std::size_t m = w.rows();
  CVector e(m);
  e[k] = 1.0;
  CVector u = lu_solve(adjoint_times(w, g), e);
  const double q = quad_form(u, g);
  if (!(q > 0.0)) throw Error(Errc::not_positive_definite, "u^H G u <= 0 in row update");
  const double s = 1.0 / std::sqrt(q);
  for (auto& z : u) z *= s;
  return u;
}

CMatrix update_wz_full(const CMatrix& w, const CMatrix& noise, std::size_t targets) {
  const std::size_t m = w.rows();
  const CMatrix uz =
      lu_solve(adjoint_times(w, noise), CMatrix::unit_columns(m, targets, m - targets));
  return uz * inv_sqrt_hermitian(hermitian_part(adjoint_times(uz, noise * uz)));
}

CMatrix update_wz_fast(const CMatrix& ws, const CMatrix& noise) {
  const std::size_t m = ws.rows();
  const std::size_t k = ws.cols();
  const CMatrix p = adjoint_times(ws, noise);  // K x M
  const CMatrix head = p.block(0, 0, k, k);
  const CMatrix tail = p.block(0, k, k, m - k);
  CMatrix b;
  try {
    b = lu_solve(head, tail);
  } catch (const Error& e) {
    if (e.code() != Errc::singular_matrix) throw;
    throw Error(Errc::degenerate_block, "W_s^H G_z E_s is singular");
  }
  CMatrix wz(m, m - k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < m - k; ++c) wz(r, c) = -b(r, c);
  }
  for (std::size_t c = 0; c < m - k; ++c) wz(k + c, c) = 1.0;
  return wz;
}

double oc_residual(const CMatrix& w, const CMatrix& noise, std::size_t targets) {
  const std::size_t m = w.rows();
  if (targets >= m) return 0.0;
  const CMatrix gw = noise * w;
  const CMatrix c = adjoint_times(w, gw);
  double worst = 0.0;
  for (std::size_t i = 0; i < targets; ++i) {
    for (std::size_t j = targets; j < m; ++j) {
      const double scale = std::sqrt(std::abs(c(i, i).real() * c(j, j).real()));
      if (scale > 0.0) worst = std::max(worst, std::abs(c(i, j)) / scale);
    }
  }
  return worst;
}

void ip0_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise) {
  for (std::size_t k = 0; k < w.cols(); ++k) {
    const CMatrix& g = k < weighted.size() ? weighted[k] : noise;
    w.set_col(k, ip0_update_row(w, g, k));
  }
}

void ip1_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise,
               WzUpdate mode, double* oc) {
  for (std::size_t k = 0; k < weighted.size(); ++k) {
    w.set_col(k, ip0_update_row(w, weighted[k], k));
  }
  refresh_wz(w, noise, weighted.size(), mode, oc);
}

void ip3_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise,
               WzUpdate mode, double* oc) {
  for (std::size_t k = 0; k < weighted.size(); ++k) {
    w.set_col(k, ip0_update_row(w, weighted[k], k));
    refresh_wz(w, noise, weighted.size(), mode, oc);
  }
}

Ip2Update ip2_update(const CMatrix& g1, const CMatrix& noise) {
  GevResult gev = gev_largest(noise, g1);
  Ip2Update out;
  out.eigenvalue = gev.eigenvalue;
  const double q = quad_form(gev.eigenvector, g1);
  if (!(q > 0.0)) throw Error(Errc::not_positive_definite, "u^H G_1 u <= 0");
  out.w1 = gev.eigenvector;
  const double s = 1.0 / std::sqrt(q);
  for (auto& z : out.w1) z *= s;
  out.direction = std::move(gev.eigenvector);
  return out;
}

CMatrix ip2_complete_wz(std::span<const cplx> u1, const CMatrix& noise) {
  const std::size_t m = u1.size();
  const CVector v = matvec(noise, u1);
  const double len = norm(v);
  if (!(len > 0.0)) throw Error(Errc::invalid_argument, "G_z u_1 vanishes");

  // Householder reflector H with H v = alpha e_1; its trailing columns are an
  // orthonormal basis of v's orthogonal complement.
  const cplx phase = std::abs(v[0]) > 0.0 ? v[0] / std::abs(v[0]) : cplx(1.0);
  CVector h = v;
  h[0] += phase * len;
  const double hh = dot(h, h).real();
  CMatrix uz(m, m - 1);
  for (std::size_t c = 1; c < m; ++c) {
    for (std::size_t r = 0; r < m; ++r) {
      const cplx delta = r == c ? 1.0 : 0.0;
      uz(r, c - 1) = delta - 2.0 * h[r] * std::conj(h[c]) / hh;
    }
  }
  return uz * inv_sqrt_hermitian(hermitian_part(adjoint_times(uz, noise * uz)));
}

void sweep_bin(Method method, CMatrix& w, std::span<const CMatrix> weighted,
               const CMatrix& noise, WzUpdate mode, double* oc) {
  switch (method) {
    case Method::auxiva:
      ip0_sweep(w, weighted, noise);
      break;
    case Method::ip1:
      ip1_sweep(w, weighted, noise, mode, oc);
      break;
    case Method::ip3:
      ip3_sweep(w, weighted, noise, mode, oc);
      break;
    case Method::ip2:
      w.set_col(0, ip2_update(weighted[0], noise).w1);
      break;
  }
}

void sweep_bins(Method method, DemixingStack& w, const CovarianceSet& cov, Exec exec,
                WzUpdate mode, std::vector<double>* oc) {
  if (oc) oc->assign(w.bins(), 0.0);
  detail::for_each_bin(w.bins(), exec, [&](std::size_t f) {
    const std::vector<CMatrix> gs = cov.weighted_at(f);
    sweep_bin(method, w.per_bin[f], gs, cov.noise[f], mode, oc ? &(*oc)[f] : nullptr);
  });
}

// ---------------------------------------------------------------------------
// Projection back

CVector projection_back(const CMatrix& w, std::span<const cplx> x, std::size_t k) {
  const std::size_t m = w.rows();
  CVector e(m);
  e[k] = 1.0;
  CVector a = lu_solve(w.adjoint(), e);
  const cplx s = dot(w.col(k), x);
  for (auto& z : a) z *= s;
  return a;
}

std::vector<Spectrogram> project_images(const DemixingStack& w, const Spectrogram& x,
                                        std::span<const std::size_t> columns, Exec exec) {
  const std::size_t m = x.channels();
  std::vector<Spectrogram> images(columns.size(), Spectrogram(x.bins(), x.frames(), m));
  detail::for_each_bin(x.bins(), exec, [&](std::size_t f) {
    const CMatrix& wf = w.per_bin[f];
    const LuDecomposition lu(wf.adjoint());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::size_t k = columns[i];
      CVector e(m);
      e[k] = 1.0;
      const CVector a = lu.solve(e);
      const CVector wk = wf.col(k);
      for (std::size_t t = 0; t < x.frames(); ++t) {
        const cplx s = dot(wk, x.frame(f, t));
        auto out = images[i].frame(f, t);
        for (std::size_t c = 0; c < m; ++c) out[c] = a[c] * s;
      }
    }
  });
  return images;
}

double image_power(const Spectrogram& image) noexcept {
  double p = 0.0;
  for (const auto& z : image.values()) p += std::norm(z);
  return p;
}

std::vector<std::size_t> pick_top_k(std::span<const double> powers, std::size_t k) {
  if (k > powers.size()) throw Error(Errc::invalid_k, "cannot pick more images than exist");
  std::vector<std::size_t> idx(powers.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return powers[a] > powers[b]; });
  idx.resize(k);
  return idx;
}

// ---------------------------------------------------------------------------
// Main loop

namespace {

void finalize_wz(DemixingStack& w, const std::vector<CMatrix>& noise, Exec exec) {
  detail::for_each_bin(w.bins(), exec, [&](std::size_t f) {
    refresh_wz(w.per_bin[f], noise[f], w.targets, WzUpdate::fast, nullptr);
  });
}

// Image power of column k summed over bins: sum_f ||a_k(f)||^2 sum_t |s_k(f,t)|^2.
std::vector<double> column_powers(const DemixingStack& w, const Spectrogram& x, Exec exec) {
  const std::size_t m = x.channels();
  std::vector<double> per_bin(x.bins() * m);
  detail::for_each_bin(x.bins(), exec, [&](std::size_t f) {
    const CMatrix& wf = w.per_bin[f];
    const CMatrix a = lu_solve(wf.adjoint(), CMatrix::identity(m));
    for (std::size_t k = 0; k < m; ++k) {
      const CVector wk = wf.col(k);
      double energy = 0.0;
      for (std::size_t t = 0; t < x.frames(); ++t) energy += std::norm(dot(wk, x.frame(f, t)));
      double gain = 0.0;
      for (std::size_t r = 0; r < m; ++r) gain += std::norm(a(r, k));
      per_bin[f * m + k] = energy * gain;
    }
  });
  std::vector<double> powers(m, 0.0);
  for (std::size_t f = 0; f < x.bins(); ++f) {
    for (std::size_t k = 0; k < m; ++k) powers[k] += per_bin[f * m + k];
  }
  return powers;
}

}  // namespace

SeparationResult run(const Spectrogram& x, std::size_t targets, const RunConfig& cfg) {
  cfg.validate();
  const std::size_t m = x.channels();
  const bool aux = cfg.method == Method::auxiva;
  if (x.bins() == 0 || x.frames() == 0 || m == 0) {
    throw Error(Errc::shape_mismatch, "empty spectrogram");
  }
  const std::size_t max_k = aux ? m : m - 1;
  if (targets < 1 || targets > max_k) {
    throw Error(Errc::invalid_k, "K=" + std::to_string(targets) + " not in [1, " +
                                     std::to_string(max_k) + "] for " +
                                     std::string(to_string(cfg.method)));
  }
  if (cfg.method == Method::ip2 && targets != 1) {
    throw Error(Errc::invalid_k, "ip2 requires K=1");
  }
  for (const auto& v : x.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(Errc::invalid_argument, "spectrogram has non-finite values");
    }
  }

  const std::size_t sources = aux ? m : targets;
  const Exec exec = cfg.exec;
  SeparationResult res;
  res.demixing = DemixingStack::identity(x.bins(), m, sources);

  Stopwatch clock;
  clock.start();
  CovarianceSet cov;
  cov.noise = noise_covariance(x, exec);
  cov.weighted.resize(sources);
  std::vector<double> oc_bins;
  double previous = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const TargetSpectra s = separate(res.demixing, x, sources, exec);
    res.variances = update_variances(s, cfg.eps1);
    for (std::size_t k = 0; k < sources; ++k) {
      cov.weighted[k] = weighted_covariance(x, res.variances.row(k), cfg.eps2, cfg.ridge, exec);
    }
    sweep_bins(cfg.method, res.demixing, cov, exec, cfg.wz_update,
               cfg.track_oc ? &oc_bins : nullptr);
    normalize_scale(res.demixing, res.variances);
    ++res.iterations_run;
    clock.stop();

    if (cfg.track_oc && cfg.method != Method::ip2) {
      res.oc_trace.push_back(*std::max_element(oc_bins.begin(), oc_bins.end()));
    }
    bool stop = false;
    if (cfg.record_cost || cfg.convergence_delta) {
      double j;
      if (cfg.method == Method::ip2) {
        DemixingStack done = res.demixing;
        finalize_wz(done, cov.noise, exec);
        j = cost_total(done, res.variances, x, exec);
      } else {
        j = cost_total(res.demixing, res.variances, x, exec);
      }
      if (cfg.record_cost) res.cost_trace.push_back(j);
      if (cfg.convergence_delta && std::isfinite(previous)) {
        const double rel = std::abs(j - previous) / std::max(std::abs(previous), 1e-300);
        stop = rel < *cfg.convergence_delta;
      }
      previous = j;
    }
    clock.start();
    if (stop) break;
  }

  if (cfg.method == Method::ip2) {
    finalize_wz(res.demixing, cov.noise, exec);
    if (cfg.track_oc) {
      double worst = 0.0;
      for (std::size_t f = 0; f < x.bins(); ++f) {
        worst = std::max(worst, oc_residual(res.demixing.per_bin[f], cov.noise[f], 1));
      }
      res.oc_trace.push_back(worst);
    }
  }

  if (aux) {
    res.columns = pick_top_k(column_powers(res.demixing, x, exec), targets);
  } else {
    res.columns.resize(targets);
    std::iota(res.columns.begin(), res.columns.end(), std::size_t{0});
  }
  res.images = project_images(res.demixing, x, res.columns, exec);
  clock.stop();
  res.wall_time = clock.seconds();
  return res;
}

}  // namespace overiva
