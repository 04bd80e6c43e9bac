#pragma once

// Block-coordinate-descent updates for the overdetermined IVA objective and
// the alternating main loop that drives them.
//
// Column conventions: W = [w_1 ... w_K | W_z] with targets in the leading K
// columns; separated signals are s_k = w_k^H x. Indices are zero-based.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "overiva/exec.hpp"
#include "overiva/linalg.hpp"
#include "overiva/model.hpp"
#include "overiva/stft.hpp"

namespace overiva {

enum class Method {
  auxiva,  // IP-0 over all M rows, each with its own variance; keep the K loudest images
  ip1,     // w_1 .. w_K, then W_z
  ip2,     // K = 1 only: w_1 from the top generalized eigenvector, W_z once at the end
  ip3,     // w_1, W_z, w_2, W_z, ... (orthogonality-constrained OverIVA)
};

std::string_view to_string(Method m) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
// 3 for IP-2, 50 otherwise.
std::size_t default_iterations(Method m) noexcept;

enum class WzUpdate {
  fast,  // [-(W_s^H G_z E_s)^{-1} W_s^H G_z E_z ; I]
  full,  // U_z (U_z^H G_z U_z)^{-1/2}, U_z = (W^H G_z)^{-1} E_z
};

struct RunConfig {
  Method method = Method::ip1;
  std::size_t iterations = 50;
  double eps1 = kDefaultVarianceFloor;
  double eps2 = kDefaultRidge;
  std::uint64_t seed = 0;
  std::optional<double> convergence_delta;
  WzUpdate wz_update = WzUpdate::fast;
  RidgeMode ridge = RidgeMode::absolute;
  Exec exec;
  bool record_cost = true;
  // Track the OC residual right after every W_z refresh.
  bool track_oc = false;

  void validate() const;
};

struct SeparationResult {
  DemixingStack demixing;
  VarianceMap variances;
  std::vector<std::size_t> columns;  // demixing columns the images come from
  std::vector<Spectrogram> images;   // spatial images, one per target
  std::vector<double> cost_trace;    // cost_total after each iteration
  std::vector<double> oc_trace;      // per-iteration max OC residual (track_oc)
  std::size_t iterations_run = 0;
  double wall_time = 0.0;            // seconds; excludes cost bookkeeping
};

// u = (W^H G)^{-1} e_k, w_k = u (u^H G u)^{-1/2}. Column k of w holds the
// current estimate.
CVector ip0_update_row(const CMatrix& w, const CMatrix& g, std::size_t k);

// W_z minimizing J_W for fixed leading `targets` columns (Q = I).
CMatrix update_wz_full(const CMatrix& w, const CMatrix& noise, std::size_t targets);

// Same column space as update_wz_full, at the cost of one K x K solve.
// Throws degenerate_block if W_s^H G_z E_s is singular.
CMatrix update_wz_fast(const CMatrix& ws, const CMatrix& noise);

// Largest sample correlation between a target output and a noise-subspace
// output: max |(W_s^H G_z W_z)_ij| / sqrt((w_i^H G_z w_i)(v_j^H G_z v_j)).
double oc_residual(const CMatrix& w, const CMatrix& noise, std::size_t targets);

// IP-0 over all M columns; columns k >= weighted.size() use G_z.
void ip0_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise);

// oc, when given, is raised to the OC residual seen after each W_z refresh.
void ip1_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise,
               WzUpdate mode = WzUpdate::fast, double* oc = nullptr);
void ip3_sweep(CMatrix& w, std::span<const CMatrix> weighted, const CMatrix& noise,
               WzUpdate mode = WzUpdate::fast, double* oc = nullptr);

struct Ip2Update {
  CVector w1;
  CVector direction;  // top generalized eigenvector u (unit 2-norm)
  double eigenvalue = 0.0;
};

// Top eigenpair of G_z u = lambda G_1 u, w_1 = u (u^H G_1 u)^{-1/2}.
Ip2Update ip2_update(const CMatrix& g1, const CMatrix& noise);

// W_z = U_z (U_z^H G_z U_z)^{-1/2} with U_z spanning the G_z-orthogonal
// complement of u_1.
CMatrix ip2_complete_wz(std::span<const cplx> u1, const CMatrix& noise);

// One BCD pass of `method` over a single bin. IP-2 only refreshes w_1.
void sweep_bin(Method method, CMatrix& w, std::span<const CMatrix> weighted,
               const CMatrix& noise, WzUpdate mode = WzUpdate::fast, double* oc = nullptr);

// sweep_bin over all bins; OpenMP across bins when exec.parallel().
void sweep_bins(Method method, DemixingStack& w, const CovarianceSet& cov, Exec exec,
                WzUpdate mode = WzUpdate::fast, std::vector<double>* oc = nullptr);

// (W^{-H} e_k)(w_k^H x)
CVector projection_back(const CMatrix& w, std::span<const cplx> x, std::size_t k);

std::vector<Spectrogram> project_images(const DemixingStack& w, const Spectrogram& x,
                                        std::span<const std::size_t> columns, Exec exec = {});

double image_power(const Spectrogram& image) noexcept;

// Indices of the k largest powers, descending; ties go to the lower index.
std::vector<std::size_t> pick_top_k(std::span<const double> powers, std::size_t k);

SeparationResult run(const Spectrogram& x, std::size_t targets, const RunConfig& cfg);

}  // namespace overiva
