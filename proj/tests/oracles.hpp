#pragma once

// Independent reference computations used by the tests: Eigen for dense
// decompositions, plain loops for sums, cofactors for small determinants.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "overiva/linalg.hpp"
#include "overiva/rng.hpp"
#include "overiva/stft.hpp"

namespace oracle {

using overiva::CMatrix;
using overiva::cplx;
using overiva::CVector;
using EMat = Eigen::MatrixXcd;

inline cplx random_cplx(overiva::Xoshiro256& rng) { return {rng.normal(), rng.normal()}; }

inline CMatrix random_matrix(std::size_t r, std::size_t c, overiva::Xoshiro256& rng) {
  CMatrix a(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) a(i, j) = random_cplx(rng);
  }
  return a;
}

inline CVector random_vector(std::size_t n, overiva::Xoshiro256& rng) {
  CVector v(n);
  for (auto& x : v) x = random_cplx(rng);
  return v;
}

inline CMatrix random_hermitian(std::size_t m, overiva::Xoshiro256& rng) {
  const CMatrix a = random_matrix(m, m, rng);
  CMatrix h = a + a.adjoint();
  h *= 0.5;
  return h;
}

// A^H A / m + shift I: well conditioned for shift ~ 0.1 and up.
inline CMatrix random_hpd(std::size_t m, overiva::Xoshiro256& rng, double shift = 0.5) {
  const CMatrix a = random_matrix(m, m, rng);
  CMatrix g = overiva::adjoint_times(a, a);
  g *= 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) g(i, i) += shift;
  return g;
}

inline EMat to_eigen(const CMatrix& a) {
  EMat e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    }
  }
  return e;
}

inline CMatrix from_eigen(const EMat& e) {
  CMatrix a(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      a(i, j) = e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return a;
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).max_abs(); }

inline cplx det3(const CMatrix& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Largest root of det(A - lambda B) from Eigen's generalized solver.
inline double gev_max(const CMatrix& a, const CMatrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<EMat> es(to_eigen(a), to_eigen(b));
  return es.eigenvalues().maxCoeff();
}

inline double log_abs_det(const CMatrix& a) {
  return std::log(std::abs(to_eigen(a).determinant()));
}

// W_z (W_z^H W_z)^{-1} W_z^H
inline CMatrix projector(const CMatrix& wz) {
  const EMat e = to_eigen(wz);
  const EMat p = e * (e.adjoint() * e).inverse() * e.adjoint();
  return from_eigen(p);
}

// (1/T) sum_t x x^H / lambda_t + ridge I for one bin, by direct summation.
inline CMatrix covariance(const overiva::Spectrogram& x, std::size_t f, const double* lambda,
                          double ridge) {
  const std::size_t m = x.channels();
  CMatrix g(m, m);
  for (std::size_t t = 0; t < x.frames(); ++t) {
    const double w = lambda ? 1.0 / lambda[t] : 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) g(i, j) += x(f, t, i) * std::conj(x(f, t, j)) * w;
    }
  }
  g *= 1.0 / static_cast<double>(x.frames());
  for (std::size_t i = 0; i < m; ++i) g(i, i) += ridge;
  return g;
}

inline overiva::Spectrogram random_spectrogram(std::size_t f, std::size_t t, std::size_t m,
                                               overiva::Xoshiro256& rng) {
  overiva::Spectrogram x(f, t, m);
  for (auto& v : x.values()) v = random_cplx(rng);
  return x;
}

// Data following the separation model: K targets with log-normal variance
// envelopes shared across bins, M - K unit-variance stationary Gaussian
// noises, and a random mixing matrix per bin.
struct ModelData {
  overiva::Spectrogram x;
  std::vector<std::vector<double>> variances;  // [k][t]
};

inline ModelData model_spectrogram(std::size_t f, std::size_t t, std::size_t m, std::size_t k,
                                   overiva::Xoshiro256& rng) {
  ModelData d{overiva::Spectrogram(f, t, m), std::vector<std::vector<double>>(k, std::vector<double>(t))};
  for (auto& row : d.variances) {
    for (auto& v : row) v = std::exp(2.0 * rng.normal());
  }
  for (std::size_t b = 0; b < f; ++b) {
    CMatrix a = random_matrix(m, m, rng);
    for (std::size_t i = 0; i < m; ++i) a(i, i) += 2.0;
    for (std::size_t n = 0; n < t; ++n) {
      CVector s(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double sd = j < k ? std::sqrt(d.variances[j][n]) : 1.0;
        s[j] = sd * random_cplx(rng) / std::sqrt(2.0);
      }
      const CVector y = overiva::matvec(a, s);
      for (std::size_t c = 0; c < m; ++c) d.x(b, n, c) = y[c];
    }
  }
  return d;
}

}  // namespace oracle
