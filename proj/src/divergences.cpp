#include "ckit/divergences.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "ckit/errors.hpp"

namespace ckit::div {

namespace {

// Round-off can push a divergence of nearly identical arguments slightly
// below zero.
double nonneg(double v) { return std::max(v, 0.0); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in (0, 1)", alpha));
  }
}

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::DimMismatch, fmt::format("dimensions {} and {} differ", a, b));
}

Vector diff(std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

double bregman(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2) {
  const double f1 = expfam::log_normalizer(fam, theta1);
  const double f2 = expfam::log_normalizer(fam, theta2);
  const MomentParam g2 = expfam::grad_log_normalizer(fam, theta2);
  return nonneg(f1 - f2 - dot(diff(theta1.coords, theta2.coords), g2.coords));
}

double bregman_dual(const Family& fam, const MomentParam& eta1, const MomentParam& eta2) {
  const double f1 = expfam::conjugate(fam, eta1);
  const double f2 = expfam::conjugate(fam, eta2);
  const NaturalParam t2 = expfam::theta_from_eta(fam, eta2);
  return nonneg(f1 - f2 - dot(diff(eta1.coords, eta2.coords), t2.coords));
}

double fenchel_young(const Family& fam, const NaturalParam& theta1, const MomentParam& eta2) {
  return nonneg(expfam::log_normalizer(fam, theta1) + expfam::conjugate(fam, eta2) -
                dot(theta1.coords, eta2.coords));
}

double skew_jensen(const Family& fam, double alpha, const NaturalParam& theta1,
                   const NaturalParam& theta2) {
  check_alpha(alpha);
  const NaturalParam mid = expfam::lerp(alpha, theta1, theta2);
  return nonneg(alpha * expfam::log_normalizer(fam, theta1) +
                (1.0 - alpha) * expfam::log_normalizer(fam, theta2) -
                expfam::log_normalizer(fam, mid));
}

double skew_jensen_dual(const Family& fam, double alpha, const MomentParam& eta1,
                        const MomentParam& eta2) {
  check_alpha(alpha);
  const MomentParam mid = expfam::lerp(alpha, eta1, eta2);
  return nonneg(alpha * expfam::conjugate(fam, eta1) + (1.0 - alpha) * expfam::conjugate(fam, eta2) -
                expfam::conjugate(fam, mid));
}

double bhattacharyya_alpha(const Family& fam, double alpha, const NaturalParam& theta1,
                           const NaturalParam& theta2) {
  return skew_jensen(fam, alpha, theta1, theta2);
}

double renyi(const Family& fam, double alpha, const NaturalParam& theta1, const NaturalParam& theta2) {
  return bhattacharyya_alpha(fam, alpha, theta1, theta2) / (1.0 - alpha);
}

double kld_expfam(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2) {
  return bregman(fam, theta2, theta1);
}

double jeffreys_bregman(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2) {
  const MomentParam g1 = expfam::grad_log_normalizer(fam, theta1);
  const MomentParam g2 = expfam::grad_log_normalizer(fam, theta2);
  return nonneg(dot(diff(theta1.coords, theta2.coords), diff(g1.coords, g2.coords)));
}

double jensen_shannon_bregman(const Family& fam, const NaturalParam& theta1,
                              const NaturalParam& theta2) {
  return skew_jensen(fam, 0.5, theta1, theta2);
}

double kld_gauss(const GaussianParams& p1, const GaussianParams& p2) {
  check_same_dim(p1.dim(), p2.dim());
  check_same_dim(p1.cov.dim(), p1.dim());
  check_same_dim(p2.cov.dim(), p2.dim());
  const std::size_t d = p1.dim();
  const SpdMatrix p2inv = spd_inverse(p2.cov);
  const double tr = (p2inv.matrix() * p1.cov.matrix()).trace();
  const double ld = log_det(p2.cov) - log_det(p1.cov);
  const double maha = inverse_quadratic_form(p2.cov, diff(p2.mean, p1.mean));
  return nonneg(0.5 * (tr + ld - static_cast<double>(d) + maha));
}

double burg(const SpdMatrix& s1, const SpdMatrix& s2) {
  check_same_dim(s1.dim(), s2.dim());
  double s = 0.0;
  for (double l : generalized_spectrum(s1, s2)) s += l - std::log(l) - 1.0;
  return nonneg(s);
}

double mahalanobis_sq(const SpdMatrix& cov, std::span<const double> mu1, std::span<const double> mu2) {
  check_same_dim(mu1.size(), mu2.size());
  check_same_dim(cov.dim(), mu1.size());
  return nonneg(inverse_quadratic_form(cov, diff(mu2, mu1)));
}

namespace detail {

double bhattacharyya_gauss_direct(double alpha, const GaussianParams& p1, const GaussianParams& p2) {
  check_alpha(alpha);
  check_same_dim(p1.dim(), p2.dim());
  const SpdMatrix prec1 = spd_inverse(p1.cov);
  const SpdMatrix prec2 = spd_inverse(p2.cov);
  const SpdMatrix prec_a(alpha * prec1.matrix() + (1.0 - alpha) * prec2.matrix());
  const SpdMatrix sigma_a = spd_inverse(prec_a);
  const Vector h1 = prec1.matrix() * std::span<const double>(p1.mean);
  const Vector h2 = prec2.matrix() * std::span<const double>(p2.mean);
  const Vector ha = expfam::lerp(alpha, h1, h2);
  const Vector mu_a = sigma_a.matrix() * std::span<const double>(ha);
  const double quad = alpha * dot(p1.mean, h1) + (1.0 - alpha) * dot(p2.mean, h2) - dot(mu_a, ha);
  const double ld = alpha * log_det(p1.cov) + (1.0 - alpha) * log_det(p2.cov) - log_det(sigma_a);
  return nonneg(0.5 * (quad + ld));
}

}  // namespace detail

}  // namespace ckit::div
