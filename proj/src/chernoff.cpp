#include "ckit/chernoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "ckit/divergences.hpp"
#include "ckit/errors.hpp"
#include "ckit/kernels.hpp"

namespace ckit {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed_form";
    case Method::Bisection: return "bisection";
    case Method::EigRoot: return "eig_root";
  }
  return "unknown";
}

namespace chernoff {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("eps = {} must lie in (0, 1)", eps));
  }
}

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::DimMismatch, fmt::format("dimensions {} and {} differ", a, b));
}

ChernoffResult degenerate_result(Method m) {
  ChernoffResult r;
  r.method = m;
  r.degenerate = true;
  return r;
}

bool same_gaussian(const GaussianParams& a, const GaussianParams& b) {
  return a.mean == b.mean && std::ranges::equal(a.cov.matrix().data(), b.cov.matrix().data());
}

double kl_1d(double m, double v, double mu, double w) {
  const double dm = mu - m;
  return 0.5 * (dm * dm / w + v / w - std::log(v / w) - 1.0);
}

// Geometric mixture p1^a p2^(1-a) of two Gaussians, from precomputed
// precisions P_i and precision-weighted means h_i = P_i mu_i.
struct GaussMixer {
  Matrix prec1, prec2;
  Vector h1, h2;

  GaussMixer(const GaussianParams& p1, const GaussianParams& p2)
      : prec1(spd_inverse(p1.cov).matrix()),
        prec2(spd_inverse(p2.cov).matrix()),
        h1(prec1 * std::span<const double>(p1.mean)),
        h2(prec2 * std::span<const double>(p2.mean)) {}

  GaussianParams at(double a) const {
    SpdMatrix sigma = spd_inverse(SpdMatrix(a * prec1 + (1.0 - a) * prec2));
    const Vector h = expfam::lerp(a, h1, h2);
    Vector mu = sigma.matrix() * std::span<const double>(h);
    return {std::move(mu), std::move(sigma)};
  }
};

}  // namespace

LrefPair uni_gaussian_pair(double mu1, double v1, double mu2, double v2) {
  return {Family::uni_gaussian(), expfam::uni_natural(mu1, v1), expfam::uni_natural(mu2, v2)};
}

double lref_log_normalizer(const LrefPair& pair, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in [0, 1]", alpha));
  }
  expfam::validate(pair.fam, pair.theta_p);
  expfam::validate(pair.fam, pair.theta_q);
  if (alpha == 0.0 || alpha == 1.0) return 0.0;
  return -div::skew_jensen(pair.fam, alpha, pair.theta_p, pair.theta_q);
}

double dual_residual(const LrefPair& pair, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in [0, 1]", alpha));
  }
  const auto& tp = pair.theta_p.coords;
  const auto& tq = pair.theta_q.coords;
  const NaturalParam mid = expfam::lerp(alpha, pair.theta_p, pair.theta_q);
  const MomentParam eta = expfam::grad_log_normalizer(pair.fam, mid);
  double s = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) s += (tq[i] - tp[i]) * eta.coords[i];
  return s - (expfam::log_normalizer(pair.fam, pair.theta_q) -
              expfam::log_normalizer(pair.fam, pair.theta_p));
}

ChernoffResult chernoff_bisect(const LrefPair& pair, double eps) {
  check_eps(eps);
  expfam::validate(pair.fam, pair.theta_p);
  expfam::validate(pair.fam, pair.theta_q);
  if (pair.theta_p.coords == pair.theta_q.coords) return degenerate_result(Method::Bisection);

  const Family& fam = pair.fam;
  auto sided = [&](double a) {
    const NaturalParam mid = expfam::lerp(a, pair.theta_p, pair.theta_q);
    return std::array{div::bregman(fam, pair.theta_p, mid), div::bregman(fam, pair.theta_q, mid)};
  };

  ChernoffResult r;
  r.method = Method::Bisection;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > eps) {
    const double a = 0.5 * (lo + hi);
    ++r.iterations;
    const auto b = sided(a);
    if (b[0] > b[1]) {
      lo = a;
    } else {
      hi = a;
    }
  }
  const double a = 0.5 * (lo + hi);
  ++r.iterations;
  const auto b = sided(a);
  r.alpha_star = a;
  // alpha B(p:mid) + (1-alpha) B(q:mid) is the skew Bhattacharyya distance at a;
  // being stationary at the optimum it is insensitive to the alpha error.
  r.value = a * b[0] + (1.0 - a) * b[1];
  r.residual = std::abs(b[0] - b[1]);
  return r;
}

ChernoffResult chernoff_gauss1d_closed(double mu1, double v1, double mu2, double v2) {
  const LrefPair pair = uni_gaussian_pair(mu1, v1, mu2, v2);
  if (mu1 == mu2 && v1 == v2) return degenerate_result(Method::ClosedForm);

  auto mixture = [&](double a) {
    const double den = a * v2 + (1.0 - a) * v1;
    return std::pair{(a * mu1 * v2 + (1.0 - a) * mu2 * v1) / den, v1 * v2 / den};
  };

  double alpha;
  if (v1 == v2) {
    alpha = 0.5;
  } else {
    // Optimality condition A m_a + B (m_a^2 + v_a) + C = 0 with
    // m_a = (n0 + n1 a)/(v1 + dv a), v_a = v1 v2/(v1 + dv a), multiplied by (v1 + dv a)^2.
    const double n0 = mu2 * v1;
    const double n1 = mu1 * v2 - mu2 * v1;
    const double dv = v2 - v1;
    const double A = mu1 / v1 - mu2 / v2;
    const double B = -1.0 / (2.0 * v1) + 1.0 / (2.0 * v2);
    const double C = 0.5 * std::log(v2 / v1) + mu2 * mu2 / (2.0 * v2) - mu1 * mu1 / (2.0 * v1);
    const double c2 = A * n1 * dv + B * n1 * n1 + C * dv * dv;
    const double c1 = A * (n0 * dv + n1 * v1) + B * (2.0 * n0 * n1 + v1 * v2 * dv) + 2.0 * C * dv * v1;
    const double c0 = A * n0 * v1 + B * (n0 * n0 + v1 * v1 * v2) + C * v1 * v1;

    std::vector<double> roots;
    if (c2 == 0.0) {
      if (c1 != 0.0) roots.push_back(-c0 / c1);
    } else {
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc >= 0.0) {
        const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        roots.push_back(q / c2);
        if (q != 0.0) roots.push_back(c0 / q);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    alpha = std::numeric_limits<double>::quiet_NaN();
    for (double x : roots) {
      if (!(x > 0.0 && x < 1.0)) continue;
      const double res = std::abs(dual_residual(pair, x));
      if (res < best) {
        best = res;
        alpha = x;
      }
    }
    if (std::isnan(alpha)) {
      throw Error(ErrorCode::NoRootInUnitInterval,
                  fmt::format("no root of the optimality quadratic in (0, 1) for ({}, {}) vs ({}, {})",
                              mu1, v1, mu2, v2));
    }
  }

  const auto [m, v] = mixture(alpha);
  const double kl_p = kl_1d(m, v, mu1, v1);
  const double kl_q = kl_1d(m, v, mu2, v2);
  ChernoffResult r;
  r.method = Method::ClosedForm;
  r.alpha_star = alpha;
  r.value = kl_p;
  r.residual = std::abs(kl_p - kl_q);
  return r;
}

ChernoffResult chernoff_gauss_nd(const GaussianParams& p1, const GaussianParams& p2, double eps) {
  check_eps(eps);
  check_same_dim(p1.dim(), p2.dim());
  check_same_dim(p1.cov.dim(), p1.dim());
  check_same_dim(p2.cov.dim(), p2.dim());
  if (same_gaussian(p1, p2)) return degenerate_result(Method::Bisection);

  const GaussMixer mix(p1, p2);
  auto sided = [&](double a) {
    const GaussianParams g = mix.at(a);
    return std::array{div::kld_gauss(g, p1), div::kld_gauss(g, p2)};
  };

  ChernoffResult r;
  r.method = Method::Bisection;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > eps) {
    const double a = 0.5 * (lo + hi);
    ++r.iterations;
    const auto kl = sided(a);
    if (kl[0] > kl[1]) {
      lo = a;
    } else {
      hi = a;
    }
  }
  const double a = 0.5 * (lo + hi);
  ++r.iterations;
  const auto kl = sided(a);
  r.alpha_star = a;
  r.value = a * kl[0] + (1.0 - a) * kl[1];
  r.residual = std::abs(kl[0] - kl[1]);
  return r;
}

ChernoffResult chernoff_scaled_centered(std::size_t d, double s) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("scale s = {} must be positive", s));
  }
  if (s == 1.0) throw Error(ErrorCode::ScaleIsOne, "s = 1 gives identical distributions");

  const double ls = std::log(s);
  const double dd = static_cast<double>(d);
  ChernoffResult r;
  r.method = Method::ClosedForm;
  r.alpha_star = (s - 1.0 - ls) / ((s - 1.0) * ls);
  r.value = dd * ((s - 1.0) * std::log(s / (s - 1.0) * ls) - s * ls + s - 1.0) / (2.0 * (1.0 - s));
  // Mixture covariance c I against I and s I.
  const double a = r.alpha_star;
  const double c = 1.0 / (a + (1.0 - a) / s);
  const double kl_p = 0.5 * dd * (c - 1.0 - std::log(c));
  const double kl_q = 0.5 * dd * (c / s - 1.0 - std::log(c / s));
  r.residual = std::abs(kl_p - kl_q);
  return r;
}

ChernoffResult chernoff_centered(const SpdMatrix& s1, const SpdMatrix& s2, double eps) {
  check_eps(eps);
  check_same_dim(s1.dim(), s2.dim());
  const Vector lambda = generalized_spectrum(s1, s2);
  if (std::ranges::all_of(lambda, [](double l) { return std::abs(l - 1.0) <= 1e-12; })) {
    return degenerate_result(Method::EigRoot);
  }

  double log_sum = 0.0;
  for (double l : lambda) log_sum += std::log(l);
  auto h = [&](double a) {
    double s = log_sum;
    for (double l : lambda) s += (1.0 - l) / (a + (1.0 - a) * l);
    return s;
  };
  auto dh = [&](double a) {
    double s = 0.0;
    for (double l : lambda) {
      const double den = a + (1.0 - a) * l;
      s -= (1.0 - l) * (1.0 - l) / (den * den);
    }
    return s;
  };

  double lo = 1e-12, hi = 1.0 - 1e-12;
  if (!(h(lo) > 0.0 && h(hi) < 0.0)) {
    throw Error(ErrorCode::NoRootInUnitInterval, "optimality condition does not change sign on (0, 1)");
  }
  ChernoffResult r;
  r.method = Method::EigRoot;
  while (hi - lo > eps) {
    const double a = 0.5 * (lo + hi);
    ++r.iterations;
    if (h(a) > 0.0) {
      lo = a;
    } else {
      hi = a;
    }
  }
  double a = 0.5 * (lo + hi);
  for (int k = 0; k < 2; ++k) {
    const double g = dh(a);
    if (g == 0.0) break;
    const double next = a - h(a) / g;
    if (next > lo && next < hi) a = next;
    ++r.iterations;
  }

  const std::size_t d = s1.dim();
  const GaussianParams p1{Vector(d, 0.0), s1};
  const GaussianParams p2{Vector(d, 0.0), s2};
  const GaussianParams g = GaussMixer(p1, p2).at(a);
  const double kl_p = div::kld_gauss(g, p1);
  const double kl_q = div::kld_gauss(g, p2);
  r.alpha_star = a;
  r.value = a * kl_p + (1.0 - a) * kl_q;
  r.residual = std::abs(kl_p - kl_q);
  return r;
}

std::pair<Vector, SpdMatrix> canonical_reduce(const GaussianParams& p1, const GaussianParams& p2) {
  check_same_dim(p1.dim(), p2.dim());
  check_same_dim(p1.cov.dim(), p1.dim());
  check_same_dim(p2.cov.dim(), p2.dim());
  const SpdMatrix w = sym_inv_sqrt(p1.cov);
  Vector dmu(p1.dim());
  for (std::size_t i = 0; i < dmu.size(); ++i) dmu[i] = p2.mean[i] - p1.mean[i];
  Vector mu12 = w.matrix() * std::span<const double>(dmu);
  return {std::move(mu12), SpdMatrix(congruence(w.matrix(), p2.cov.matrix()))};
}

GeodesicPoint geodesic_e(const GaussianParams& p1, const GaussianParams& p2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in [0, 1]", alpha));
  }
  check_same_dim(p1.dim(), p2.dim());
  if (alpha == 0.0) return {alpha, p1};
  if (alpha == 1.0) return {alpha, p2};
  // GaussMixer weights its first argument by the mixing coefficient.
  return {alpha, GaussMixer(p2, p1).at(alpha)};
}

GeodesicPoint geodesic_m(const GaussianParams& p1, const GaussianParams& p2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in [0, 1]", alpha));
  }
  check_same_dim(p1.dim(), p2.dim());
  if (alpha == 0.0) return {alpha, p1};
  if (alpha == 1.0) return {alpha, p2};
  const double b = 1.0 - alpha;
  const Vector mu = expfam::lerp(b, p1.mean, p2.mean);
  Matrix cov = b * (p1.cov.matrix() + outer(p1.mean, p1.mean)) +
               alpha * (p2.cov.matrix() + outer(p2.mean, p2.mean)) - outer(mu, mu);
  return {alpha, {mu, SpdMatrix(cov)}};
}

PairwiseMin chernoff_pairwise_min(const std::vector<GaussianParams>& params, double eps) {
  if (params.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two distributions");
  const Matrix dc = kernels::pairwise_chernoff(params, eps, kernels::Exec::Parallel);
  PairwiseMin best{std::numeric_limits<double>::infinity(), 0, 1};
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = i + 1; j < params.size(); ++j)
      if (dc(i, j) < best.value) best = {dc(i, j), i, j};
  return best;
}

}  // namespace chernoff
}  // namespace ckit
