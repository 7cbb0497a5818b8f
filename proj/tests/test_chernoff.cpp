#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ckit/chernoff.hpp"
#include "ckit/divergences.hpp"
#include "ckit/errors.hpp"
#include "support.hpp"

using namespace ckit;
using ckit::testing::max_abs_diff;
using ckit::testing::Rng;

namespace {

GaussianParams mixture(const GaussianParams& p, const GaussianParams& q, double alpha) {
  const NaturalParam t = expfam::lerp(alpha, expfam::natural_from_gaussian(p), expfam::natural_from_gaussian(q));
  return expfam::gaussian_from_natural(t, p.dim());
}

double equalization_gap(const GaussianParams& p, const GaussianParams& q, double alpha) {
  const GaussianParams m = mixture(p, q, alpha);
  return std::abs(div::kld_gauss(m, p) - div::kld_gauss(m, q));
}

// D_{B,alpha}, extended by 0 at the endpoints.
double bhatt(const GaussianParams& p, const GaussianParams& q, double alpha) {
  const LrefPair pair{Family::mvn(p.dim()), expfam::natural_from_gaussian(p), expfam::natural_from_gaussian(q)};
  return -chernoff::lref_log_normalizer(pair, alpha);
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

GaussianParams bivariate_example() { return {{1, 2}, SpdMatrix{{1, -1}, {-1, 2}}}; }

}  // namespace

TEST_CASE("lref log-normalizer") {
  const LrefPair pair = chernoff::uni_gaussian_pair(0, 1, 1, 2);
  CHECK(chernoff::lref_log_normalizer(pair, 0.0) == 0.0);
  CHECK(chernoff::lref_log_normalizer(pair, 1.0) == 0.0);
  CHECK(chernoff::lref_log_normalizer(pair, 0.4215580558605244) == doctest::Approx(-0.1155433222682347).epsilon(1e-12));
  const LrefPair same = chernoff::uni_gaussian_pair(0, 1, 0, 1);
  CHECK(chernoff::lref_log_normalizer(same, 0.5) == 0.0);
  for (int i = 0; i <= 20; ++i) CHECK(chernoff::lref_log_normalizer(pair, i / 20.0) <= 0.0);
  CHECK(code_of([&] { chernoff::lref_log_normalizer(pair, 1.5); }) == ErrorCode::AlphaOutOfRange);
}

TEST_CASE("univariate examples") {
  const ChernoffResult c1 = chernoff::chernoff_gauss1d_closed(0, 1, 1, 2);
  CHECK(std::abs(c1.alpha_star - 0.4215580558605244) < 1e-12);
  CHECK(std::abs(c1.value - 0.1155433222682347) < 1e-12);
  CHECK(c1.method == Method::ClosedForm);

  const ChernoffResult b1 = chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(0, 1, 1, 2), 1e-8);
  CHECK(std::abs(b1.alpha_star - 0.42155805602669716) < 1e-8);
  CHECK(b1.iterations == 28);
  const ChernoffResult b1s = chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(1, 2, 0, 1), 1e-8);
  CHECK(std::abs(b1s.alpha_star - 0.5784419439733028) < 1e-8);
  CHECK(std::abs(b1.alpha_star + b1s.alpha_star - 1.0) < 2e-8);

  const ChernoffResult c2 = chernoff::chernoff_gauss1d_closed(1, 3, 5, 5);
  CHECK(std::abs(c2.alpha_star - 0.4371453168322306) < 1e-10);
  CHECK(std::abs(c2.value - 0.5242883659200144) < 1e-10);
  const ChernoffResult b2 = chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(1, 3, 5, 5), 1e-8);
  CHECK(std::abs(b2.value - 0.5242883659200137) < 1e-9);

  const ChernoffResult eq = chernoff::chernoff_gauss1d_closed(-1, 2, 3, 2);
  CHECK(eq.alpha_star == 0.5);
  CHECK(eq.value == doctest::Approx(16.0 / 16.0).epsilon(1e-14));
}

TEST_CASE("bivariate example") {
  const ChernoffResult r = chernoff::chernoff_gauss_nd(GaussianParams::standard(2), bivariate_example(), 1e-8);
  CHECK(std::abs(r.alpha_star - 0.5825489424169064) < 1e-8);
  CHECK(std::abs(r.value - 0.8827640697808525) < 1e-8);
  CHECK(r.iterations == 28);
  CHECK(r.residual <= 10 * 1e-8 * std::max(1.0, r.value));
}

TEST_CASE("scaled centered closed form") {
  const double l2 = std::numbers::ln2;
  for (std::size_t d : {1u, 2u, 5u}) {
    const ChernoffResult r = chernoff::chernoff_scaled_centered(d, 0.5);
    CHECK(std::abs(r.alpha_star - (2 * l2 - 1) / l2) < 1e-14);
    CHECK(std::abs(r.value - d * (l2 - std::log(l2) - 1) / 2) < 1e-14);
    const ChernoffResult nd = chernoff::chernoff_gauss_nd(
        GaussianParams::standard(d), {Vector(d), SpdMatrix(0.5 * Matrix::identity(d))}, 1e-10);
    CHECK(std::abs(nd.value - r.value) < 1e-8);
    CHECK(std::abs(nd.alpha_star - r.alpha_star) < 1e-7);
  }
  // D_C is symmetric in s <-> 1/s while the exponent flips to 1 - alpha.
  for (double s : {0.1, 0.5, 2.0, 7.5}) {
    const ChernoffResult a = chernoff::chernoff_scaled_centered(3, s);
    const ChernoffResult b = chernoff::chernoff_scaled_centered(3, 1 / s);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
    CHECK(a.alpha_star + b.alpha_star == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(code_of([] { chernoff::chernoff_scaled_centered(2, 1.0); }) == ErrorCode::ScaleIsOne);
  CHECK(code_of([] { chernoff::chernoff_scaled_centered(2, -1.0); }) == ErrorCode::OutOfDomain);
}

TEST_CASE("centered eigenvalue root") {
  const double d4[] = {1, 2, 3, 4};
  const SpdMatrix diag = SpdMatrix::diagonal(d4);
  const ChernoffResult r = chernoff::chernoff_centered(diag, SpdMatrix::identity(4));
  CHECK(std::abs(r.alpha_star - 0.59694) < 5e-5);
  CHECK(std::abs(r.value - 0.22076) < 5e-5);
  CHECK(r.method == Method::EigRoot);
  const ChernoffResult rev = chernoff::chernoff_centered(SpdMatrix::identity(4), diag);
  CHECK(rev.alpha_star == doctest::Approx(1 - r.alpha_star).epsilon(1e-10));
  CHECK(rev.value == doctest::Approx(r.value).epsilon(1e-10));

  const ChernoffResult scaled = chernoff::chernoff_centered(SpdMatrix::identity(3), SpdMatrix(2.0 * Matrix::identity(3)));
  const ChernoffResult closed = chernoff::chernoff_scaled_centered(3, 2.0);
  CHECK(scaled.alpha_star == doctest::Approx(closed.alpha_star).epsilon(1e-9));
  CHECK(scaled.value == doctest::Approx(closed.value).epsilon(1e-9));

  CHECK(chernoff::chernoff_centered(diag, diag).degenerate);

  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const SpdMatrix s1 = rng.spd_scaled(3), s2 = rng.spd_scaled(3);
    const ChernoffResult c = chernoff::chernoff_centered(s1, s2);
    const ChernoffResult nd = chernoff::chernoff_gauss_nd({Vector(3), s1}, {Vector(3), s2}, 1e-10);
    CHECK(std::abs(c.value - nd.value) < 1e-7);
    CHECK(std::abs(c.alpha_star - nd.alpha_star) < 1e-7);
  }
}

TEST_CASE("equal-covariance law") {
  Rng rng(41);
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 1 + k % 4;
    const GaussianParams p = rng.gaussian(d, 2.0);
    const GaussianParams q{rng.vector(d, -2, 2), p.cov};
    const double expected = div::mahalanobis_sq(p.cov, p.mean, q.mean) / 8;
    const ChernoffResult r = chernoff::chernoff_gauss_nd(p, q, 1e-10);
    CHECK(std::abs(r.alpha_star - 0.5) < 1e-9);
    CHECK(std::abs(r.value - expected) < 1e-9);
  }
}

TEST_CASE("1D agreement between solvers") {
  Rng rng(51);
  for (int k = 0; k < 100; ++k) {
    const double m1 = rng.uniform(-3, 3), v1 = rng.uniform(0.2, 4);
    const double m2 = rng.uniform(-3, 3), v2 = rng.uniform(0.2, 4);
    const ChernoffResult c = chernoff::chernoff_gauss1d_closed(m1, v1, m2, v2);
    const ChernoffResult b = chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(m1, v1, m2, v2), 1e-10);
    const ChernoffResult n = chernoff::chernoff_gauss_nd(GaussianParams::univariate(m1, v1),
                                                         GaussianParams::univariate(m2, v2), 1e-10);
    CHECK(std::abs(c.alpha_star - b.alpha_star) < 1e-7);
    CHECK(std::abs(c.alpha_star - n.alpha_star) < 1e-9);
    CHECK(c.value == doctest::Approx(b.value).epsilon(1e-9));
    CHECK(c.residual < 1e-10);
  }
}

TEST_CASE("equalization, conjugacy, symmetry, sandwich") {
  Rng rng(61);
  const double eps = 1e-9;
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 1 + k % 3;
    const GaussianParams p = rng.gaussian(d), q = rng.gaussian(d);
    const ChernoffResult pq = chernoff::chernoff_gauss_nd(p, q, eps);
    const ChernoffResult qp = chernoff::chernoff_gauss_nd(q, p, eps);
    CHECK(equalization_gap(p, q, pq.alpha_star) <= 1e-6 * std::max(1.0, pq.value));
    CHECK(std::abs(pq.alpha_star + qp.alpha_star - 1) <= 2 * eps);
    CHECK(std::abs(pq.value - qp.value) < 1e-8);
    CHECK(pq.value > 0.0);
    CHECK(pq.value <= std::min(div::kld_gauss(p, q), div::kld_gauss(q, p)));
    // The reported value is the maximum of the skewed Bhattacharyya curve.
    CHECK(pq.value >= bhatt(p, q, std::clamp(pq.alpha_star + 1e-3, 0.0, 1.0)));
    CHECK(pq.value >= bhatt(p, q, std::clamp(pq.alpha_star - 1e-3, 0.0, 1.0)));

    const NaturalParam tp = expfam::natural_from_gaussian(p), tq = expfam::natural_from_gaussian(q);
    const ChernoffResult bis = chernoff::chernoff_bisect({Family::mvn(d), tp, tq}, eps);
    CHECK(equalization_gap(p, q, bis.alpha_star) <= 1e-6 * std::max(1.0, bis.value));
    CHECK(std::abs(bis.alpha_star - pq.alpha_star) < 2 * eps);
  }
  for (int k = 0; k < 50; ++k) {
    const double m1 = rng.uniform(-3, 3), v1 = rng.uniform(0.2, 4);
    const double m2 = rng.uniform(-3, 3), v2 = rng.uniform(0.2, 4);
    const ChernoffResult c = chernoff::chernoff_gauss1d_closed(m1, v1, m2, v2);
    CHECK(equalization_gap(GaussianParams::univariate(m1, v1), GaussianParams::univariate(m2, v2), c.alpha_star) <=
          1e-6 * std::max(1.0, c.value));
  }
}

TEST_CASE("skewed Bhattacharyya curve is concave") {
  Rng rng(71);
  for (int k = 0; k < 50; ++k) {
    const GaussianParams p = rng.gaussian(2, 2.0), q = rng.gaussian(2, 2.0);
    std::vector<double> curve(101);
    for (int i = 0; i <= 100; ++i) curve[i] = bhatt(p, q, i / 100.0);
    for (int i = 1; i < 100; ++i) CHECK(curve[i - 1] - 2 * curve[i] + curve[i + 1] <= 1e-13);
  }
}

TEST_CASE("dual residual") {
  const LrefPair pair = chernoff::uni_gaussian_pair(0, 1, 1, 2);
  const ChernoffResult c = chernoff::chernoff_gauss1d_closed(0, 1, 1, 2);
  CHECK(std::abs(chernoff::dual_residual(pair, c.alpha_star)) <= 1e-6);
  const double kl_pq = div::kld_gauss(GaussianParams::univariate(0, 1), GaussianParams::univariate(1, 2));
  const double kl_qp = div::kld_gauss(GaussianParams::univariate(1, 2), GaussianParams::univariate(0, 1));
  CHECK(chernoff::dual_residual(pair, 0.0) == doctest::Approx(kl_qp).epsilon(1e-12));
  CHECK(chernoff::dual_residual(pair, 1.0) == doctest::Approx(-kl_pq).epsilon(1e-12));
  double prev = chernoff::dual_residual(pair, 0.0);
  for (int i = 1; i <= 50; ++i) {
    const double r = chernoff::dual_residual(pair, i / 50.0);
    CHECK(r < prev);
    prev = r;
  }
  const LrefPair same = chernoff::uni_gaussian_pair(2, 3, 2, 3);
  CHECK(chernoff::dual_residual(same, 0.3) == 0.0);
}

TEST_CASE("canonical reduction") {
  const auto [mu0, s0] = chernoff::canonical_reduce(bivariate_example(), bivariate_example());
  CHECK(max_abs_diff(mu0, Vector{0, 0}) < 1e-14);
  CHECK(max_abs_diff(s0.matrix(), Matrix::identity(2)) < 1e-14);
  const auto [mu1, s1] = chernoff::canonical_reduce(GaussianParams::standard(2), bivariate_example());
  CHECK(max_abs_diff(mu1, bivariate_example().mean) < 1e-14);
  CHECK(max_abs_diff(s1.matrix(), bivariate_example().cov.matrix()) < 1e-14);

  Rng rng(81);
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 2 + k % 3;
    const GaussianParams p = rng.gaussian(d, 2.0), q = rng.gaussian(d, 2.0);
    const auto [mu, s] = chernoff::canonical_reduce(p, q);
    const ChernoffResult orig = chernoff::chernoff_gauss_nd(p, q, 1e-10);
    const ChernoffResult red = chernoff::chernoff_gauss_nd(GaussianParams::standard(d), {mu, s}, 1e-10);
    CHECK(std::abs(orig.value - red.value) < 1e-7);
    CHECK(std::abs(orig.alpha_star - red.alpha_star) < 1e-7);
  }
}

TEST_CASE("geodesics") {
  const GaussianParams p = GaussianParams::standard(2), q = bivariate_example();
  for (const auto& geo : {chernoff::geodesic_e, chernoff::geodesic_m}) {
    const GeodesicPoint a = geo(p, q, 0.0), b = geo(p, q, 1.0);
    CHECK(a.params.mean == p.mean);
    CHECK(max_abs_diff(a.params.cov.matrix(), p.cov.matrix()) == 0.0);
    CHECK(b.params.mean == q.mean);
    CHECK(max_abs_diff(b.params.cov.matrix(), q.cov.matrix()) == 0.0);
    const GeodesicPoint c = geo(q, q, 0.37);
    CHECK(max_abs_diff(c.params.mean, q.mean) < 1e-13);
    CHECK(max_abs_diff(c.params.cov.matrix(), q.cov.matrix()) < 1e-13);
    for (int i = 1; i < 10; ++i) CHECK(eigvals_sym(geo(p, q, i / 10.0).params.cov.matrix())[0] > 0.0);
  }
  CHECK_THROWS_AS(chernoff::geodesic_e(p, q, 1.5), Error);

  Rng rng(91);
  for (int k = 0; k < 20; ++k) {
    const GaussianParams a = rng.gaussian(3), b = rng.gaussian(3);
    const double t = rng.uniform();
    const NaturalParam expected =
        expfam::lerp(1 - t, expfam::natural_from_gaussian(a), expfam::natural_from_gaussian(b));
    const NaturalParam got = expfam::natural_from_gaussian(chernoff::geodesic_e(a, b, t).params);
    CHECK(max_abs_diff(got.coords, expected.coords) < 1e-10);

    // Mixture path: moments (mean, second moment) are linear.
    const GaussianParams m = chernoff::geodesic_m(a, b, t).params;
    const Family fam = Family::mvn(3);
    const MomentParam em = expfam::eta_from_theta(fam, expfam::natural_from_gaussian(m));
    const MomentParam el = expfam::lerp(1 - t, expfam::eta_from_theta(fam, expfam::natural_from_gaussian(a)),
                                        expfam::eta_from_theta(fam, expfam::natural_from_gaussian(b)));
    CHECK(max_abs_diff(em.coords, el.coords) < 1e-10);
  }
}

TEST_CASE("pairwise minimum") {
  const std::vector<GaussianParams> two{GaussianParams::standard(2), bivariate_example()};
  const PairwiseMin m2 = chernoff::chernoff_pairwise_min(two);
  CHECK(m2.value == chernoff::chernoff_gauss_nd(two[0], two[1]).value);
  CHECK(m2.i == 0);
  CHECK(m2.j == 1);

  const std::vector<GaussianParams> dup{GaussianParams::univariate(0, 1), GaussianParams::univariate(4, 1),
                                        GaussianParams::univariate(0, 1)};
  const PairwiseMin md = chernoff::chernoff_pairwise_min(dup);
  CHECK(md.value == 0.0);
  CHECK(md.i == 0);
  CHECK(md.j == 2);

  const std::vector<GaussianParams> three{GaussianParams::univariate(0, 1), GaussianParams::univariate(3, 2),
                                          GaussianParams::univariate(-2, 0.5)};
  double best = INFINITY;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double v = chernoff::chernoff_gauss_nd(three[i], three[j]).value;
      if (v < best) best = v, bi = i, bj = j;
    }
  const PairwiseMin m3 = chernoff::chernoff_pairwise_min(three);
  CHECK(m3.value == best);
  CHECK(m3.i == bi);
  CHECK(m3.j == bj);
  CHECK_THROWS_AS(chernoff::chernoff_pairwise_min({GaussianParams::standard(1)}), Error);
}

TEST_CASE("degenerate and invalid inputs") {
  const ChernoffResult c = chernoff::chernoff_gauss1d_closed(1, 2, 1, 2);
  CHECK(c.degenerate);
  CHECK(c.value == 0.0);
  CHECK(c.alpha_star == 0.5);
  CHECK(chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(1, 2, 1, 2)).degenerate);
  CHECK(chernoff::chernoff_gauss_nd(bivariate_example(), bivariate_example()).degenerate);
  CHECK(code_of([] { chernoff::chernoff_gauss_nd(GaussianParams::standard(2), GaussianParams::standard(3)); }) ==
        ErrorCode::DimMismatch);
  CHECK(code_of([] { chernoff::chernoff_gauss1d_closed(0, -1, 1, 2); }) == ErrorCode::OutOfDomain);
  CHECK_THROWS_AS(chernoff::chernoff_bisect(chernoff::uni_gaussian_pair(0, 1, 1, 2), 0.0), Error);
}
