#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ckit/errors.hpp"
#include "ckit/expfam.hpp"
#include "support.hpp"

using namespace ckit;
using ckit::testing::max_abs_diff;
using ckit::testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

// Interior natural parameter for each family under test.
NaturalParam random_theta(const Family& fam, Rng& rng) {
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: return expfam::uni_natural(rng.uniform(-2, 2), rng.uniform(0.3, 3));
    case FamilyTag::MvnGaussian: return expfam::natural_from_gaussian(rng.gaussian(fam.dim()));
    case FamilyTag::CenteredMvn: return expfam::natural_from_covariance(rng.spd_scaled(fam.dim()));
    case FamilyTag::Categorical:
    case FamilyTag::Isotropic: return {rng.vector(fam.natural_dim(), -2, 2)};
  }
  return {};
}

std::vector<Family> families() {
  return {Family::uni_gaussian(), Family::mvn(1), Family::mvn(3), Family::centered_mvn(2),
          Family::centered_mvn(3), Family::categorical(2), Family::categorical(4), Family::isotropic(3)};
}

}  // namespace

TEST_CASE("log_normalizer examples") {
  const Family uni = Family::uni_gaussian();
  CHECK(expfam::log_normalizer(uni, expfam::uni_natural(0, 1)) ==
        doctest::Approx(0.5 * std::log(2 * kPi)).epsilon(1e-15));
  CHECK(expfam::log_normalizer(Family::categorical(2), {{0.0}}) == doctest::Approx(std::log(2.0)));
  // Centered MVN with theta = I: -1/2 log|I| plus the folded d/2 log(2 pi).
  CHECK(expfam::log_normalizer(Family::centered_mvn(2), expfam::natural_from_covariance(SpdMatrix::identity(2))) ==
        doctest::Approx(std::log(2 * kPi)).epsilon(1e-15));
}

TEST_CASE("MVN log-normalizer equals the Gaussian normalizing constant") {
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const GaussianParams g = rng.gaussian(3);
    const SpdMatrix prec = spd_inverse(g.cov);
    const double expected = 0.5 * inverse_quadratic_form(g.cov, g.mean) + 0.5 * log_det(g.cov) +
                            1.5 * std::log(2 * kPi);
    (void)prec;
    CHECK(expfam::log_normalizer(Family::mvn(3), expfam::natural_from_gaussian(g)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gradient examples") {
  const Family uni = Family::uni_gaussian();
  CHECK(expfam::grad_log_normalizer(uni, expfam::uni_natural(0, 1)).coords == Vector{0.0, 1.0});
  const Vector eta = expfam::grad_log_normalizer(uni, expfam::uni_natural(1, 2)).coords;
  CHECK(eta[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eta[1] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(expfam::grad_log_normalizer(Family::categorical(2), {{0.0}}).coords[0] == doctest::Approx(0.5));

  // Centered: eta = -1/2 theta^-1, packed without doubling.
  const SpdMatrix cov{{2, 0.5}, {0.5, 1}};
  const Vector ec = expfam::grad_log_normalizer(Family::centered_mvn(2), expfam::natural_from_covariance(cov)).coords;
  CHECK(max_abs_diff(ec, Vector{-1.0, -0.25, -0.5}) < 1e-15);
}

TEST_CASE("conjugate examples") {
  const Family uni = Family::uni_gaussian();
  CHECK(expfam::conjugate(uni, {{0, 1}}) == doctest::Approx(-0.5 * std::log(2 * kPi * std::numbers::e)));
  const NaturalParam th = expfam::theta_from_eta(uni, {{1, 3}});
  CHECK(std::abs(expfam::log_normalizer(uni, th) + expfam::conjugate(uni, {{1, 3}}) - dot(th.coords, Vector{1, 3})) <
        1e-12);
  CHECK(expfam::conjugate(Family::categorical(2), {{0.5}}) == doctest::Approx(-std::log(2.0)));
  CHECK_THROWS_AS(expfam::conjugate(uni, {{1, 1}}), Error);
}

TEST_CASE("univariate conversions") {
  const Family uni = Family::uni_gaussian();
  const NaturalParam th = expfam::theta_from_ordinary(uni, {{1, 2}});
  CHECK(th.coords == Vector{0.5, -0.25});
  CHECK(expfam::ordinary_from_theta(uni, {{0.5, -0.25}}).coords == Vector{1.0, 2.0});
  CHECK(expfam::eta_from_ordinary(uni, {{1, 2}}).coords == Vector{1.0, 3.0});
  CHECK(expfam::ordinary_from_eta(uni, {{1, 3}}).coords == Vector{1.0, 2.0});
}

TEST_CASE("categorical conversions") {
  const Family cat = Family::categorical(3);
  const OrdinaryParam p{{0.2, 0.3, 0.5}};
  const NaturalParam th = expfam::theta_from_ordinary(cat, p);
  CHECK(th.coords[0] == doctest::Approx(std::log(0.4)));
  CHECK(max_abs_diff(expfam::ordinary_from_theta(cat, th).coords, p.coords) < 1e-15);
  CHECK(max_abs_diff(expfam::eta_from_ordinary(cat, p).coords, Vector{0.2, 0.3}) == 0.0);
  CHECK(max_abs_diff(expfam::ordinary_from_eta(cat, {{0.2, 0.3}}).coords, p.coords) < 1e-15);
  CHECK_THROWS_AS(expfam::theta_from_ordinary(cat, {{0.5, 0.5, 0.0}}), Error);
  // log-sum-exp keeps large parameters finite.
  CHECK(std::isfinite(expfam::log_normalizer(cat, {{800.0, 799.0}})));
}

TEST_CASE("MVN conversions") {
  Rng rng(19);
  const Family fam = Family::mvn(3);
  for (int k = 0; k < 10; ++k) {
    const GaussianParams g = rng.gaussian(3);
    const NaturalParam th = expfam::natural_from_gaussian(g);
    const GaussianParams back = expfam::gaussian_from_natural(th, 3);
    CHECK(max_abs_diff(back.mean, g.mean) < 1e-12);
    CHECK(max_abs_diff(back.cov.matrix(), g.cov.matrix()) < 1e-12);

    const OrdinaryParam lam = expfam::ordinary_from_theta(fam, th);
    CHECK(max_abs_diff(expfam::theta_from_ordinary(fam, lam).coords, th.coords) < 1e-10);
    const MomentParam eta = expfam::eta_from_ordinary(fam, lam);
    CHECK(max_abs_diff(expfam::eta_from_theta(fam, th).coords, eta.coords) < 1e-10);
    CHECK(max_abs_diff(expfam::ordinary_from_eta(fam, eta).coords, lam.coords) < 1e-10);
  }
}

TEST_CASE("densities") {
  const Family uni = Family::uni_gaussian();
  const double x0[] = {0.0};
  const double x1[] = {1.0};
  CHECK(expfam::density(uni, expfam::uni_natural(0, 1), x0) == doctest::Approx(1 / std::sqrt(2 * kPi)));
  CHECK(expfam::density(uni, expfam::uni_natural(1, 2), x1) == doctest::Approx(1 / std::sqrt(4 * kPi)));
  const double z[] = {0.0, 0.0};
  CHECK(expfam::density(Family::mvn(2), expfam::natural_from_gaussian(GaussianParams::standard(2)), z) ==
        doctest::Approx(1 / (2 * kPi)));
  CHECK(expfam::density(Family::centered_mvn(2), expfam::natural_from_covariance(SpdMatrix::identity(2)), z) ==
        doctest::Approx(1 / (2 * kPi)));
  const double iso[] = {0.5, -0.5, 1.0};
  const double expected = std::exp(-0.5 * 1.5) / std::pow(2 * kPi, 1.5);
  CHECK(expfam::density(Family::isotropic(3), {{0, 0, 0}}, iso) == doctest::Approx(expected));
  const double bad[] = {3.0};
  CHECK_THROWS_AS(expfam::density(Family::categorical(3), {{0, 0}}, bad), Error);
}

TEST_CASE("normalization by summation and quadrature") {
  const Family cat = Family::categorical(4);
  const NaturalParam th{{0.3, -1.2, 2.0}};
  double s = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double x[] = {static_cast<double>(k)};
    s += expfam::density(cat, th, x);
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  // Midpoint rule on a wide window; the Gaussian tails beyond it are negligible.
  const Family uni = Family::uni_gaussian();
  const NaturalParam g = expfam::uni_natural(0.7, 1.9);
  const int n = 200000;
  const double lo = -20, hi = 20, h = (hi - lo) / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x[] = {lo + (i + 0.5) * h};
    mass += expfam::density(uni, g, x) * h;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("domain validation rejects rather than clamps") {
  const Family uni = Family::uni_gaussian();
  CHECK_FALSE(expfam::in_natural_domain(uni, {{0.0, 0.0}}));
  CHECK_FALSE(expfam::in_natural_domain(uni, {{0.0, 0.5}}));
  CHECK_FALSE(expfam::in_moment_domain(uni, {{1.0, 1.0}}));
  CHECK_FALSE(expfam::in_natural_domain(uni, {{0.0, NAN}}));
  CHECK_THROWS_AS(expfam::log_normalizer(uni, {{0.0, 0.1}}), Error);
  try {
    expfam::log_normalizer(uni, {{0.0, -1.0, 2.0}});
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimMismatch);
  }
  try {
    expfam::uni_natural(0.0, -1.0);
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  // Natural matrix block must be positive definite.
  CHECK_FALSE(expfam::in_natural_domain(Family::centered_mvn(2), {{1.0, 4.0, 1.0}}));
  CHECK_FALSE(expfam::in_moment_domain(Family::categorical(3), {{0.6, 0.5}}));
  CHECK_THROWS_AS(Family::categorical(1), Error);
}

TEST_CASE("gradient matches central differences") {
  Rng rng(77);
  for (const Family& fam : families()) {
    for (int k = 0; k < 10; ++k) {
      const NaturalParam th = random_theta(fam, rng);
      const Vector g = expfam::grad_log_normalizer(fam, th).coords;
      for (std::size_t i = 0; i < th.coords.size(); ++i) {
        const double h = 1e-5;
        NaturalParam up = th, dn = th;
        up.coords[i] += h;
        dn.coords[i] -= h;
        const double fd = (expfam::log_normalizer(fam, up) - expfam::log_normalizer(fam, dn)) / (2 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
      }
    }
  }
}

TEST_CASE("log-normalizer is strictly convex along random segments") {
  Rng rng(78);
  for (const Family& fam : families()) {
    for (int k = 0; k < 10; ++k) {
      const NaturalParam a = random_theta(fam, rng);
      const NaturalParam b = random_theta(fam, rng);
      for (double al : {0.25, 0.5, 0.75}) {
        const double gap = al * expfam::log_normalizer(fam, a) + (1 - al) * expfam::log_normalizer(fam, b) -
                           expfam::log_normalizer(fam, expfam::lerp(al, a, b));
        CHECK(gap > 0.0);
      }
    }
  }
}

TEST_CASE("Legendre involution and Fenchel-Young equality") {
  Rng rng(79);
  for (const Family& fam : families()) {
    for (int k = 0; k < 10; ++k) {
      const NaturalParam th = random_theta(fam, rng);
      const MomentParam eta = expfam::eta_from_theta(fam, th);
      const NaturalParam back = expfam::theta_from_eta(fam, eta);
      CHECK(max_abs_diff(back.coords, th.coords) < 1e-10 * std::max(1.0, max_abs_diff(th.coords, Vector(th.coords.size()))));
      CHECK(max_abs_diff(expfam::eta_from_theta(fam, back).coords, eta.coords) < 1e-10);
      const double fy = expfam::log_normalizer(fam, th) + expfam::conjugate(fam, eta) - dot(th.coords, eta.coords);
      CHECK(std::abs(fy) < 1e-10);
    }
  }
}

TEST_CASE("packing reproduces the trace inner product") {
  Rng rng(80);
  const Matrix a = symmetrized(rng.matrix(3, 3));
  const Matrix b = symmetrized(rng.matrix(3, 3));
  const double tr = (a.transpose() * b).trace();
  CHECK(dot(expfam::pack_symmetric(a, true), expfam::pack_symmetric(b, false)) == doctest::Approx(tr).epsilon(1e-14));
  CHECK(max_abs_diff(expfam::unpack_symmetric(expfam::pack_symmetric(a, true), 3, true), a) < 1e-16);
}
