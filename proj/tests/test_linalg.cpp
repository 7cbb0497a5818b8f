#include <doctest.h>

#include <cmath>

#include "ckit/errors.hpp"
#include "ckit/linalg.hpp"
#include "support.hpp"

using namespace ckit;
using ckit::testing::max_abs_diff;
using ckit::testing::Rng;

namespace {

double reconstruction_error(const Matrix& l, const Matrix& m) {
  return frobenius_norm(l * l.transpose() - m) / frobenius_norm(m);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("cholesky on small fixed matrices") {
  CHECK(max_abs_diff(cholesky(SpdMatrix::identity(2)), Matrix::identity(2)) == 0.0);
  const Matrix l = cholesky(SpdMatrix{{4, 0}, {0, 9}});
  CHECK(max_abs_diff(l, Matrix{{2, 0}, {0, 3}}) < 1e-15);
  const SpdMatrix m{{1, -1}, {-1, 2}};
  CHECK(reconstruction_error(cholesky(m), m.matrix()) < 1e-12);
}

TEST_CASE("SPD construction rejects bad input") {
  CHECK(code_of([] { SpdMatrix{{1, 2}, {2, 1}}; }) == ErrorCode::NotPositiveDefinite);
  CHECK(code_of([] { SpdMatrix{{1, 0.5}, {0.4, 1}}; }) == ErrorCode::NotSymmetric);
  CHECK(code_of([] { SpdMatrix(Matrix(2, 3)); }) == ErrorCode::DimMismatch);
  CHECK(code_of([] { SpdMatrix{{0, 0}, {0, 0}}; }) == ErrorCode::NotPositiveDefinite);
  CHECK(code_of([] { SpdMatrix{{1, 0}, {0, NAN}}; }) == ErrorCode::NotPositiveDefinite);
  // Relative pivot floor: the second pivot is 1e-15 of the trace scale.
  CHECK(code_of([] { SpdMatrix{{1, 1}, {1, 1 + 1e-15}}; }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("benign asymmetry is symmetrized") {
  const SpdMatrix m{{2, 1 + 1e-12}, {1, 2}};
  CHECK(m(0, 1) == m(1, 0));
}

TEST_CASE("log_det") {
  CHECK(log_det(SpdMatrix::identity(3)) == 0.0);
  const double d[] = {1, 2, 3, 4};
  CHECK(log_det(SpdMatrix::diagonal(d)) == doctest::Approx(std::log(24.0)).epsilon(1e-15));
  CHECK(std::abs(log_det(SpdMatrix{{1, -1}, {-1, 2}})) < 1e-15);
}

TEST_CASE("spd_inverse") {
  CHECK(max_abs_diff(spd_inverse(SpdMatrix::identity(4)).matrix(), Matrix::identity(4)) == 0.0);
  const double d[] = {2, 4};
  CHECK(max_abs_diff(spd_inverse(SpdMatrix::diagonal(d)).matrix(), Matrix{{0.5, 0}, {0, 0.25}}) < 1e-16);
  const SpdMatrix inv = spd_inverse(SpdMatrix{{1, -1}, {-1, 2}});
  CHECK(max_abs_diff(inv.matrix(), Matrix{{2, 1}, {1, 1}}) < 1e-14);
  CHECK(inv(0, 1) == inv(1, 0));
}

TEST_CASE("sym_sqrt and its inverse") {
  CHECK(max_abs_diff(sym_sqrt(SpdMatrix::identity(3)).matrix(), Matrix::identity(3)) < 1e-15);
  const double d[] = {4, 9};
  CHECK(max_abs_diff(sym_sqrt(SpdMatrix::diagonal(d)).matrix(), Matrix{{2, 0}, {0, 3}}) < 1e-15);
  const SpdMatrix m{{2, 1}, {1, 2}};
  const Matrix s = sym_sqrt(m).matrix();
  CHECK(frobenius_norm(s * s - m.matrix()) < 1e-10);
  const Matrix w = sym_inv_sqrt(m).matrix();
  CHECK(max_abs_diff(w * m.matrix() * w, Matrix::identity(2)) < 1e-14);
}

TEST_CASE("eigvals_sym") {
  const double d[] = {3, 1, 2};
  const Vector e = eigvals_sym(Matrix::diagonal(d));
  CHECK(e == Vector{1, 2, 3});
  const Vector e2 = eigvals_sym(Matrix{{2, 1}, {1, 2}});
  CHECK(e2[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e2[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eigvals_sym(Matrix::identity(5)) == Vector(5, 1.0));
  CHECK(code_of([] { eigvals_sym(Matrix(2, 3)); }) == ErrorCode::DimMismatch);
}

TEST_CASE("eigenvectors diagonalize") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const Matrix a = symmetrized(rng.matrix(6, 6, -3, 3));
    const SymEigen e = eig_sym(a);
    const Matrix back = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
    CHECK(max_abs_diff(back, a) < 1e-12);
    CHECK(max_abs_diff(e.vectors.transpose() * e.vectors, Matrix::identity(6)) < 1e-13);
  }
}

TEST_CASE("generalized_spectrum") {
  Rng rng(5);
  const SpdMatrix s = rng.spd(3);
  for (double l : generalized_spectrum(s, s)) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));

  const double d[] = {1, 2, 3, 4};
  const Vector lam = generalized_spectrum(SpdMatrix::diagonal(d), SpdMatrix::identity(4));
  for (int i = 0; i < 4; ++i) CHECK(lam[i] == doctest::Approx(i + 1.0).epsilon(1e-14));

  const SpdMatrix scaled(2.5 * s.matrix());
  for (double l : generalized_spectrum(scaled, s)) CHECK(l == doctest::Approx(2.5).epsilon(1e-12));

  CHECK(code_of([] { generalized_spectrum(SpdMatrix::identity(2), SpdMatrix::identity(3)); }) ==
        ErrorCode::DimMismatch);
}

TEST_CASE("random SPD properties") {
  Rng rng(2024);
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 1 + k % 7;
    const SpdMatrix m = rng.spd(d);
    CHECK(reconstruction_error(cholesky(m), m.matrix()) < 1e-10);

    double sum_log = 0.0, sum = 0.0;
    for (double l : eigvals_sym(m.matrix())) {
      sum_log += std::log(l);
      sum += l;
    }
    CHECK(log_det(m) == doctest::Approx(sum_log).epsilon(1e-8));
    CHECK(sum == doctest::Approx(m.matrix().trace()).epsilon(1e-9));

    const SpdMatrix s = sym_sqrt(m);  // construction asserts symmetry and PD
    CHECK(frobenius_norm(s.matrix() * s.matrix() - m.matrix()) < 1e-9 * frobenius_norm(m.matrix()));
    CHECK(max_abs_diff(m.matrix() * spd_inverse(m).matrix(), Matrix::identity(d)) < 1e-10);

    const SpdMatrix other = rng.spd(d);
    const Vector ab = generalized_spectrum(m, other);
    const Vector ba = generalized_spectrum(other, m);
    for (std::size_t i = 0; i < d; ++i) CHECK(ab[i] == doctest::Approx(1.0 / ba[d - 1 - i]).epsilon(1e-8));

    const Vector b = rng.vector(d);
    const Vector x = solve(m, b);
    CHECK(max_abs_diff(m.matrix() * std::span<const double>(x), b) < 1e-12);
    CHECK(inverse_quadratic_form(m, b) == doctest::Approx(dot(b, x)).epsilon(1e-12));
  }
}
