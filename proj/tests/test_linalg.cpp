#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "overiva/error.hpp"
#include "overiva/linalg.hpp"

using namespace overiva;

namespace {

constexpr double kSolveTol = 1e-10;
constexpr double kEigTol = 1e-9;
constexpr double kGevTol = 1e-8;

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("lu_solve with the identity returns the right-hand side") {
    Xoshiro256 rng(1);
    const CMatrix b = oracle::random_matrix(3, 2, rng);
    CHECK(oracle::max_abs_diff(lu_solve(CMatrix::identity(3), b), b) == 0.0);
  }

  TEST_CASE("lu_solve on a diagonal system") {
    const CMatrix a(2, 2, {2.0, 0.0, 0.0, 4.0});
    const CVector x = lu_solve(a, CVector{2.0, 4.0});
    CHECK(std::abs(x[0] - 1.0) < 1e-15);
    CHECK(std::abs(x[1] - 1.0) < 1e-15);
  }

  TEST_CASE("lu_solve residual on random well-conditioned systems") {
    Xoshiro256 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      CMatrix a = oracle::random_matrix(5, 5, rng);
      for (std::size_t i = 0; i < 5; ++i) a(i, i) += 5.0;
      const CVector b = oracle::random_vector(5, rng);
      const CVector x = lu_solve(a, b);
      const CVector r = matvec(a, x);
      double err = 0.0;
      for (std::size_t i = 0; i < 5; ++i) err = std::max(err, std::abs(r[i] - b[i]));
      CHECK(err <= kSolveTol * norm(b));
    }
  }

  TEST_CASE("lu_solve rejects singular matrices") {
    const CMatrix a(2, 2, {1.0, 2.0, 2.0, 4.0});
    try {
      lu_solve(a, CVector{1.0, 1.0});
      FAIL("expected singular_matrix");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::singular_matrix);
    }
  }

  TEST_CASE("cholesky closed forms and reconstruction") {
    CHECK(oracle::max_abs_diff(cholesky(CMatrix::identity(2)), CMatrix::identity(2)) == 0.0);
    const CMatrix l = cholesky(CMatrix(2, 2, {4.0, 0.0, 0.0, 9.0}));
    CHECK(oracle::max_abs_diff(l, CMatrix(2, 2, {2.0, 0.0, 0.0, 3.0})) < 1e-15);

    Xoshiro256 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix a = oracle::random_hpd(6, rng, 1.0);
      const CMatrix ll = cholesky(a);
      for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = i + 1; j < 6; ++j) CHECK(ll(i, j) == cplx(0.0));
      }
      CHECK((ll * ll.adjoint() - a).norm() <= kSolveTol * a.norm());
    }
  }

  TEST_CASE("cholesky raises on indefinite or non-Hermitian input") {
    try {
      cholesky(CMatrix(2, 2, {1.0, 0.0, 0.0, -1.0}));
      FAIL("expected not_positive_definite");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_positive_definite);
    }
    try {
      cholesky(CMatrix(2, 2, {2.0, 1.0, 0.0, 2.0}));
      FAIL("expected not_hermitian");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_hermitian);
    }
  }

  TEST_CASE("hermitian_eig on diagonal and Pauli-Y matrices") {
    const auto d = hermitian_eig(CMatrix(2, 2, {1.0, 0.0, 0.0, 5.0}));
    CHECK(d.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.eigenvalues[1] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(d.eigenvectors(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(d.eigenvectors(1, 1)) - 1.0) < 1e-14);

    const cplx i(0.0, 1.0);
    const auto y = hermitian_eig(CMatrix(2, 2, {0.0, -i, i, 0.0}));
    CHECK(y.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(y.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("hermitian_eig reconstructs random matrices and matches Eigen") {
    Xoshiro256 rng(4);
    for (std::size_t m : {1u, 2u, 3u, 6u, 8u, 16u}) {
      const CMatrix a = oracle::random_hermitian(m, rng);
      const auto e = hermitian_eig(a);
      const CMatrix& v = e.eigenvectors;
      const CMatrix rec = v * CMatrix::diagonal(e.eigenvalues) * v.adjoint();
      CHECK((rec - a).norm() <= kEigTol * a.norm());
      CHECK((adjoint_times(v, v) - CMatrix::identity(m)).norm() <= kEigTol);
      for (std::size_t j = 0; j < m; ++j) {
        const CVector av = matvec(a, v.col(j));
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) r += std::norm(av[i] - e.eigenvalues[j] * v(i, j));
        CHECK(std::sqrt(r) <= kEigTol * a.norm());
      }
      Eigen::SelfAdjointEigenSolver<oracle::EMat> es(oracle::to_eigen(a));
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(std::abs(e.eigenvalues[j] - es.eigenvalues()(static_cast<Eigen::Index>(j))) <=
              kEigTol * a.norm());
      }
    }
  }

  TEST_CASE("gev_largest closed forms") {
    const auto r = gev_largest(CMatrix(2, 2, {2.0, 0.0, 0.0, 8.0}), CMatrix(2, 2, {1.0, 0.0, 0.0, 2.0}));
    CHECK(r.eigenvalue == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(r.eigenvector[0]) < 1e-14);
    CHECK(std::abs(r.eigenvector[1] - 1.0) < 1e-14);

    Xoshiro256 rng(5);
    const CMatrix b = oracle::random_hpd(4, rng);
    CHECK(gev_largest(b, b).eigenvalue == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("gev_largest on a degenerate pencil returns the lowest-index choice") {
    const auto r = gev_largest(CMatrix::identity(3), CMatrix::identity(3));
    CHECK(r.eigenvalue == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(r.eigenvector[0] - 1.0) < 1e-15);
    const auto again = gev_largest(CMatrix::identity(3), CMatrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i) CHECK(again.eigenvector[i] == r.eigenvector[i]);
  }

  TEST_CASE("gev_largest matches the full generalized spectrum") {
    Xoshiro256 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t m = 2 + static_cast<std::size_t>(rng.below(7));
      const CMatrix a = oracle::random_hermitian(m, rng);
      const CMatrix b = oracle::random_hpd(m, rng);
      const auto r = gev_largest(a, b);
      CHECK(std::abs(r.eigenvalue - oracle::gev_max(a, b)) <= kGevTol * (1.0 + std::abs(r.eigenvalue)));
      const CVector au = matvec(a, r.eigenvector);
      const CVector bu = matvec(b, r.eigenvector);
      double res = 0.0;
      for (std::size_t i = 0; i < m; ++i) res += std::norm(au[i] - r.eigenvalue * bu[i]);
      CHECK(std::sqrt(res) <= kGevTol * (a.norm() + std::abs(r.eigenvalue) * b.norm()));
      CHECK(norm(r.eigenvector) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("logabsdet closed forms and cofactor oracle") {
    CHECK(logabsdet(CMatrix::identity(4)) == 0.0);
    const double e = std::numbers::e;
    CHECK(logabsdet(CMatrix(2, 2, {e, 0.0, 0.0, e})) == doctest::Approx(2.0).epsilon(1e-14));

    Xoshiro256 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const CMatrix a = oracle::random_matrix(3, 3, rng);
      CHECK(logabsdet(a) == doctest::Approx(std::log(std::abs(oracle::det3(a)))).epsilon(1e-10));
    }
  }

  TEST_CASE("logabsdet is additive over products") {
    Xoshiro256 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix a = oracle::random_matrix(5, 5, rng);
      const CMatrix b = oracle::random_matrix(5, 5, rng);
      CHECK(std::abs(logabsdet(a * b) - logabsdet(a) - logabsdet(b)) <= 1e-9);
    }
  }

  TEST_CASE("logabsdet rejects singular matrices") {
    CHECK_THROWS_AS(logabsdet(CMatrix(2, 2)), Error);
  }

  TEST_CASE("inv_sqrt_hermitian") {
    CHECK(oracle::max_abs_diff(inv_sqrt_hermitian(CMatrix::identity(3)), CMatrix::identity(3)) < 1e-15);
    const CMatrix s = inv_sqrt_hermitian(CMatrix(2, 2, {4.0, 0.0, 0.0, 16.0}));
    CHECK(oracle::max_abs_diff(s, CMatrix(2, 2, {0.5, 0.0, 0.0, 0.25})) < 1e-15);

    Xoshiro256 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix a = oracle::random_hpd(4, rng);
      const CMatrix t = inv_sqrt_hermitian(a);
      CHECK((t * a * t - CMatrix::identity(4)).norm() <= kEigTol);
    }
    CHECK_THROWS_AS(inv_sqrt_hermitian(CMatrix(2, 2, {1.0, 0.0, 0.0, -1.0})), Error);
  }

  TEST_CASE("matrix helpers") {
    const cplx i(0.0, 1.0);
    const CMatrix a(2, 2, {1.0, i, 2.0, 3.0});
    const CMatrix ah = a.adjoint();
    CHECK(ah(0, 1) == cplx(2.0));
    CHECK(ah(1, 0) == -i);
    CHECK(oracle::max_abs_diff(adjoint_times(a, a), a.adjoint() * a) == 0.0);
    CHECK(dot(CVector{i, 1.0}, CVector{i, 2.0}) == cplx(3.0));
    CHECK(hermitian_defect(CMatrix(2, 2, {1.0, i, -i, 1.0})) == 0.0);
    const CMatrix e = CMatrix::unit_columns(4, 1, 2);
    CHECK(e(1, 0) == cplx(1.0));
    CHECK(e(2, 1) == cplx(1.0));
    CHECK(e.max_abs() == 1.0);
  }

  TEST_CASE("hermitian_part") {
    const cplx i(0.0, 1.0);
    const CMatrix h = hermitian_part(CMatrix(2, 2, {1.0 + i, 2.0, 4.0 * i, 3.0}));
    CHECK(h(0, 0) == cplx(1.0));
    CHECK(h(1, 1) == cplx(3.0));
    CHECK(h(0, 1) == 0.5 * (2.0 - 4.0 * i));
    CHECK(h(1, 0) == std::conj(h(0, 1)));
    Xoshiro256 rng(23);
    const CMatrix g = oracle::random_hermitian(5, rng);
    CHECK(oracle::max_abs_diff(hermitian_part(g), g) == 0.0);
  }
}
