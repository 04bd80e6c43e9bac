#include "overiva/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "overiva/error.hpp"

namespace overiva {

namespace {

constexpr double kHermitianTolerance = 1e-12;

void require_square(const CMatrix& a, const char* what) {
  if (!a.square() || a.rows() == 0) {
    throw Error(Errc::shape_mismatch, std::string(what) + ": matrix must be square and non-empty");
  }
}

void require_hermitian(const CMatrix& a, const char* what) {
  const double scale = std::max(a.max_abs(), 1e-300);
  if (hermitian_defect(a) > kHermitianTolerance * scale) {
    throw Error(Errc::not_hermitian, std::string(what) + ": input is not Hermitian");
  }
}

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> row_major)
    : rows_(rows), cols_(cols), data_(row_major) {
  if (data_.size() != rows * cols) {
    throw Error(Errc::shape_mismatch, "initializer size does not match dimensions");
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> d) {
  CMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

CMatrix CMatrix::column(std::span<const cplx> v) {
  CMatrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

CMatrix CMatrix::unit_columns(std::size_t n, std::size_t first, std::size_t count) {
  CMatrix m(n, count);
  for (std::size_t j = 0; j < count; ++j) m(first + j, j) = 1.0;
  return m;
}

CVector CMatrix::col(std::size_t c) const {
  CVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void CMatrix::set_col(std::size_t c, std::span<const cplx> v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

CMatrix CMatrix::col_block(std::size_t first, std::size_t count) const {
  return block(0, first, rows_, count);
}

void CMatrix::set_col_block(std::size_t first, const CMatrix& b) {
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r, first + c) = b(r, c);
  }
}

CMatrix CMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  CMatrix b(nr, nc);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  }
  return b;
}

CMatrix CMatrix::adjoint() const {
  CMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
  }
  return t;
}

double CMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double CMatrix::norm() const noexcept {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::shape_mismatch, "matrix sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::shape_mismatch, "matrix difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) noexcept {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::shape_mismatch, "matrix product");
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix adjoint_times(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw Error(Errc::shape_mismatch, "adjoint product");
  CMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cplx aki = std::conj(a(k, i));
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

CVector matvec(const CMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw Error(Errc::shape_mismatch, "matrix-vector product");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CVector adjoint_matvec(const CMatrix& a, std::span<const cplx> x) {
  if (a.rows() != x.size()) throw Error(Errc::shape_mismatch, "adjoint matrix-vector product");
  CVector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += std::conj(a(i, j)) * x[i];
  }
  return y;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm(std::span<const cplx> v) noexcept {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

double quad_form(std::span<const cplx> w, const CMatrix& g) {
  return dot(w, matvec(g, w)).real();
}

double hermitian_defect(const CMatrix& a) noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
    }
  }
  return d;
}

CMatrix hermitian_part(const CMatrix& a) {
  CMatrix h = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const cplx avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h(i, j) = avg;
      h(j, i) = std::conj(avg);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// LU

LuDecomposition::LuDecomposition(CMatrix a) : lu_(std::move(a)) {
  require_square(lu_, "lu");
  const std::size_t n = lu_.rows();
  const double threshold = kSingularityThreshold * lu_.max_abs();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(lu_(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > threshold) || best == 0.0) {
      throw Error(Errc::singular_matrix, "pivot " + std::to_string(k) + " below threshold");
    }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(piv, c));
      std::swap(perm_[k], perm_[piv]);
    }
    const cplx inv = 1.0 / lu_(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const cplx m = lu_(r, k) * inv;
      lu_(r, k) = m;
      if (m == cplx{}) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= m * lu_(k, c);
    }
  }
}

CMatrix LuDecomposition::solve(const CMatrix& b) const {
  const std::size_t n = size();
  if (b.rows() != n) throw Error(Errc::shape_mismatch, "lu_solve: right-hand side rows");
  CMatrix x(n, b.cols());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) x(r, c) = b(perm_[r], c);
  }
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = 1; r < n; ++r) {
      cplx s = x(r, c);
      for (std::size_t k = 0; k < r; ++k) s -= lu_(r, k) * x(k, c);
      x(r, c) = s;
    }
    for (std::size_t r = n; r-- > 0;) {
      cplx s = x(r, c);
      for (std::size_t k = r + 1; k < n; ++k) s -= lu_(r, k) * x(k, c);
      x(r, c) = s / lu_(r, r);
    }
  }
  return x;
}

CVector LuDecomposition::solve(std::span<const cplx> b) const {
  return solve(CMatrix::column(b)).col(0);
}

double LuDecomposition::log_abs_det() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += std::log(std::abs(lu_(i, i)));
  return s;
}

CMatrix lu_solve(const CMatrix& a, const CMatrix& b) { return LuDecomposition(a).solve(b); }

CVector lu_solve(const CMatrix& a, std::span<const cplx> b) { return LuDecomposition(a).solve(b); }

double logabsdet(const CMatrix& a) { return LuDecomposition(a).log_abs_det(); }

// ---------------------------------------------------------------------------
// Cholesky and triangular solves

CMatrix cholesky(const CMatrix& a) {
  require_square(a, "cholesky");
  require_hermitian(a, "cholesky");
  const std::size_t n = a.rows();
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) {
      throw Error(Errc::not_positive_definite, "cholesky pivot " + std::to_string(j) + " <= 0");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

CMatrix solve_lower(const CMatrix& l, const CMatrix& b) {
  const std::size_t n = l.rows();
  CMatrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = x(r, c);
      for (std::size_t k = 0; k < r; ++k) s -= l(r, k) * x(k, c);
      x(r, c) = s / l(r, r);
    }
  }
  return x;
}

CMatrix solve_lower_adjoint(const CMatrix& l, const CMatrix& b) {
  const std::size_t n = l.rows();
  CMatrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = n; r-- > 0;) {
      cplx s = x(r, c);
      for (std::size_t k = r + 1; k < n; ++k) s -= std::conj(l(k, r)) * x(k, c);
      x(r, c) = s / std::conj(l(r, r));
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Hermitian eigenproblem: cyclic Jacobi with complex rotations
//
// For the pair (p, q) with a_pq = |a_pq| e, the rotation
//   J = [[c, s e], [-s conj(e), c]]
// is the real Jacobi rotation conjugated by diag(1, conj(e)); J^H A J has a
// zero (p, q) entry.

HermitianEig hermitian_eig(const CMatrix& input) {
  require_square(input, "hermitian_eig");
  require_hermitian(input, "hermitian_eig");
  const std::size_t n = input.rows();

  CMatrix a = input;
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  CMatrix v = CMatrix::identity(n);

  const double scale = a.norm();
  const double target = 1e-15 * scale;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(a(i, j));
    }
    return std::sqrt(s);
  };

  bool converged = scale == 0.0 || off_norm() <= target;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const cplx e = a(p, q) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const cplx jpq = s * e;
        const cplx jqp = -s * std::conj(e);

        // A <- A J
        for (std::size_t i = 0; i < n; ++i) {
          const cplx aip = a(i, p);
          const cplx aiq = a(i, q);
          a(i, p) = aip * c + aiq * jqp;
          a(i, q) = aip * jpq + aiq * c;
        }
        // A <- J^H A
        for (std::size_t j = 0; j < n; ++j) {
          const cplx apj = a(p, j);
          const cplx aqj = a(q, j);
          a(p, j) = c * apj + std::conj(jqp) * aqj;
          a(q, j) = std::conj(jpq) * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        // V <- V J
        for (std::size_t i = 0; i < n; ++i) {
          const cplx vip = v(i, p);
          const cplx viq = v(i, q);
          v(i, p) = vip * c + viq * jqp;
          v(i, q) = vip * jpq + viq * c;
        }
      }
    }
    converged = off_norm() <= target;
  }
  if (!converged) throw Error(Errc::no_convergence, "Jacobi sweep budget exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });

  HermitianEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

GevResult gev_largest(const CMatrix& a, const CMatrix& b) {
  require_square(a, "gev_largest");
  require_hermitian(a, "gev_largest");
  if (b.rows() != a.rows() || !b.square()) throw Error(Errc::shape_mismatch, "gev_largest pencil");
  const CMatrix l = cholesky(b);

  // C = L^{-1} A L^{-H} = L^{-1} (L^{-1} A)^H since A is Hermitian.
  CMatrix c = solve_lower(l, solve_lower(l, a).adjoint());
  const std::size_t n = c.rows();
  const HermitianEig eig = hermitian_eig(hermitian_part(c));

  const double top = eig.eigenvalues.back();
  const double tie = 1e-12 * std::max(std::abs(eig.eigenvalues.front()), std::abs(top));
  std::size_t pick = n - 1;
  while (pick > 0 && eig.eigenvalues[pick - 1] >= top - tie) --pick;

  CMatrix u = solve_lower_adjoint(l, eig.eigenvectors.col_block(pick, 1));
  GevResult out;
  out.eigenvalue = eig.eigenvalues[pick];
  out.eigenvector = u.col(0);

  std::size_t lead = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(out.eigenvector[i]) > std::abs(out.eigenvector[lead])) lead = i;
  }
  const cplx phase = std::abs(out.eigenvector[lead]) / out.eigenvector[lead];
  const double len = norm(out.eigenvector);
  for (auto& z : out.eigenvector) z *= phase / len;
  return out;
}

CMatrix inv_sqrt_hermitian(const CMatrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  const std::size_t n = a.rows();
  CMatrix scaled = eig.eigenvectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.eigenvalues[k];
    if (!(lam > 0.0)) {
      throw Error(Errc::not_positive_definite, "inv_sqrt_hermitian: eigenvalue <= 0");
    }
    const double f = 1.0 / std::sqrt(lam);
    for (std::size_t i = 0; i < n; ++i) scaled(i, k) *= f;
  }
  CMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += scaled(i, k) * std::conj(eig.eigenvectors(j, k));
      out(i, j) = s;
    }
  }
  return out;
}

}  // namespace overiva
