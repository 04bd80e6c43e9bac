#pragma once

// Dense complex linear algebra for the small (M x M, M <= ~64) matrices that
// appear per frequency bin: demixing matrices and spatial covariances.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace overiva {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

// Row-major dense complex matrix with value semantics.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> row_major);

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const double> d);
  static CMatrix column(std::span<const cplx> v);
  // [e_first, ..., e_{first+count-1}] in C^{n x count}.
  static CMatrix unit_columns(std::size_t n, std::size_t first, std::size_t count);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  CVector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const cplx> v);
  CMatrix col_block(std::size_t first, std::size_t count) const;
  void set_col_block(std::size_t first, const CMatrix& block);
  CMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

  CMatrix adjoint() const;
  double max_abs() const noexcept;
  double norm() const noexcept;  // Frobenius

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s) noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);

// a^H b without materializing a^H.
CMatrix adjoint_times(const CMatrix& a, const CMatrix& b);
CVector matvec(const CMatrix& a, std::span<const cplx> x);
// a^H x
CVector adjoint_matvec(const CMatrix& a, std::span<const cplx> x);
// a^H b
cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm(std::span<const cplx> v) noexcept;
// Re(w^H G w); G is assumed Hermitian.
double quad_form(std::span<const cplx> w, const CMatrix& g);
// max |a_ij - conj(a_ji)|
double hermitian_defect(const CMatrix& a) noexcept;
// (A + A^H) / 2, square A
CMatrix hermitian_part(const CMatrix& a);

// LU with partial pivoting. Pivot search takes the largest magnitude, lowest
// row index on ties. A pivot below 1e-13 * max|A| is treated as singular.
class LuDecomposition {
 public:
  static constexpr double kSingularityThreshold = 1e-13;

  explicit LuDecomposition(CMatrix a);

  std::size_t size() const noexcept { return lu_.rows(); }
  CMatrix solve(const CMatrix& b) const;
  CVector solve(std::span<const cplx> b) const;
  double log_abs_det() const noexcept;

 private:
  CMatrix lu_;
  std::vector<std::size_t> perm_;
};

CMatrix lu_solve(const CMatrix& a, const CMatrix& b);
CVector lu_solve(const CMatrix& a, std::span<const cplx> b);
double logabsdet(const CMatrix& a);

// Lower-triangular L with L L^H = A.
CMatrix cholesky(const CMatrix& a);
// L^{-1} B and L^{-H} B for lower-triangular L.
CMatrix solve_lower(const CMatrix& l, const CMatrix& b);
CMatrix solve_lower_adjoint(const CMatrix& l, const CMatrix& b);

struct HermitianEig {
  std::vector<double> eigenvalues;  // ascending
  CMatrix eigenvectors;             // orthonormal columns
};

// Cyclic complex Jacobi.
inline constexpr int kJacobiMaxSweeps = 100;
HermitianEig hermitian_eig(const CMatrix& a);

struct GevResult {
  double eigenvalue = 0.0;
  CVector eigenvector;  // unit 2-norm, largest-magnitude entry real positive
};

// Largest eigenpair of the Hermitian-definite pencil A u = lambda B u via
// Cholesky reduction. A repeated top eigenvalue resolves to the lowest index
// of the ascending reduced spectrum.
GevResult gev_largest(const CMatrix& a, const CMatrix& b);

// V diag(lambda^{-1/2}) V^H for Hermitian positive definite A.
CMatrix inv_sqrt_hermitian(const CMatrix& a);

}  // namespace overiva
