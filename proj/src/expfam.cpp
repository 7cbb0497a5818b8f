#include "ckit/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "ckit/errors.hpp"

namespace ckit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void require_length(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::DimMismatch, fmt::format("{} has length {}, expected {}", what, v.size(), n));
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Tries to build an SPD matrix; returns false instead of throwing.
bool try_spd(const Matrix& m, SpdMatrix* out = nullptr) {
  try {
    SpdMatrix s(m);
    if (out) *out = std::move(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

struct MvnView {
  Vector vec;
  Matrix mat;
};

MvnView split_mvn(std::span<const double> coords, std::size_t d, bool doubled) {
  MvnView v{Vector(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(d)), {}};
  v.mat = expfam::unpack_symmetric(coords.subspan(d), d, doubled);
  return v;
}

Vector join(std::span<const double> a, std::span<const double> b) {
  Vector out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// log(1 + sum exp(theta_i)) without overflow.
double log1p_sum_exp(std::span<const double> theta) {
  double m = 0.0;
  for (double t : theta) m = std::max(m, t);
  double s = std::exp(-m);
  for (double t : theta) s += std::exp(t - m);
  return m + std::log(s);
}

double categorical_remainder(std::span<const double> eta) {
  double s = 0.0;
  for (double e : eta) s += e;
  return 1.0 - s;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

GaussianParams GaussianParams::univariate(double mu, double v) {
  const double d[] = {v};
  return {Vector{mu}, SpdMatrix::diagonal(d)};
}

Family Family::mvn(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "MVN dimension must be positive");
  return Family(FamilyTag::MvnGaussian, d);
}

Family Family::centered_mvn(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "centered MVN dimension must be positive");
  return Family(FamilyTag::CenteredMvn, d);
}

Family Family::categorical(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "categorical family needs at least 2 categories");
  return Family(FamilyTag::Categorical, d);
}

Family Family::isotropic(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "isotropic dimension must be positive");
  return Family(FamilyTag::Isotropic, d);
}

std::size_t Family::natural_dim() const noexcept {
  switch (tag_) {
    case FamilyTag::UniGaussian: return 2;
    case FamilyTag::MvnGaussian: return dim_ + expfam::packed_size(dim_);
    case FamilyTag::CenteredMvn: return expfam::packed_size(dim_);
    case FamilyTag::Categorical: return dim_ - 1;
    case FamilyTag::Isotropic: return dim_;
  }
  return 0;
}

std::string Family::name() const {
  switch (tag_) {
    case FamilyTag::UniGaussian: return "UniGaussian";
    case FamilyTag::MvnGaussian: return fmt::format("MvnGaussian({})", dim_);
    case FamilyTag::CenteredMvn: return fmt::format("CenteredMvn({})", dim_);
    case FamilyTag::Categorical: return fmt::format("Categorical({})", dim_);
    case FamilyTag::Isotropic: return fmt::format("Isotropic({})", dim_);
  }
  return "Unknown";
}

namespace expfam {

Vector pack_symmetric(const Matrix& m, bool double_offdiag) {
  const std::size_t d = m.rows();
  Vector out;
  out.reserve(packed_size(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      out.push_back(i == j || !double_offdiag ? v : 2.0 * v);
    }
  return out;
}

Matrix unpack_symmetric(std::span<const double> packed, std::size_t d, bool doubled_offdiag) {
  require_length(packed, packed_size(d), "packed symmetric block");
  Matrix m(d, d);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j, ++k) {
      const double v = (i == j || !doubled_offdiag) ? packed[k] : 0.5 * packed[k];
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

Vector lerp(double alpha, std::span<const double> a, std::span<const double> b) {
  require_length(b, a.size(), "interpolation endpoint");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + (1.0 - alpha) * b[i];
  return out;
}

bool in_natural_domain(const Family& fam, const NaturalParam& theta) {
  const auto& c = theta.coords;
  if (c.size() != fam.natural_dim() || !all_finite(c)) return false;
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: return c[1] < 0.0;
    case FamilyTag::MvnGaussian:
      return try_spd(unpack_symmetric(std::span(c).subspan(fam.dim()), fam.dim(), true));
    case FamilyTag::CenteredMvn: return try_spd(unpack_symmetric(c, fam.dim(), true));
    case FamilyTag::Categorical:
    case FamilyTag::Isotropic: return true;
  }
  return false;
}

bool in_moment_domain(const Family& fam, const MomentParam& eta) {
  const auto& c = eta.coords;
  if (c.size() != fam.natural_dim() || !all_finite(c)) return false;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: return c[1] - c[0] * c[0] > 0.0;
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, false);
      // Sigma = -eta_M - eta_v eta_v^T
      return try_spd(-1.0 * (v.mat + outer(v.vec, v.vec)));
    }
    case FamilyTag::CenteredMvn: return try_spd(-2.0 * unpack_symmetric(c, d, false));
    case FamilyTag::Categorical:
      return std::all_of(c.begin(), c.end(), [](double e) { return e > 0.0; }) &&
             categorical_remainder(c) > 0.0;
    case FamilyTag::Isotropic: return true;
  }
  return false;
}

void validate(const Family& fam, const NaturalParam& theta) {
  require_length(theta.coords, fam.natural_dim(), "natural parameter");
  if (!in_natural_domain(fam, theta)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("natural parameter outside the domain of {}", fam.name()));
  }
}

void validate(const Family& fam, const MomentParam& eta) {
  require_length(eta.coords, fam.natural_dim(), "moment parameter");
  if (!in_moment_domain(fam, eta)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("moment parameter outside the domain of {}", fam.name()));
  }
}

double log_normalizer(const Family& fam, const NaturalParam& theta) {
  validate(fam, theta);
  const auto& c = theta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian:
      return -c[0] * c[0] / (4.0 * c[1]) + 0.5 * std::log(kPi / -c[1]);
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, true);
      const SpdMatrix tm(v.mat);
      return 0.25 * inverse_quadratic_form(tm, v.vec) - 0.5 * log_det(tm) +
             0.5 * static_cast<double>(d) * std::log(kPi);
    }
    case FamilyTag::CenteredMvn: {
      const SpdMatrix t(unpack_symmetric(c, d, true));
      return -0.5 * log_det(t) + 0.5 * static_cast<double>(d) * kLog2Pi;
    }
    case FamilyTag::Categorical: return log1p_sum_exp(c);
    case FamilyTag::Isotropic: return 0.5 * dot(c, c) + 0.5 * static_cast<double>(d) * kLog2Pi;
  }
  return 0.0;
}

MomentParam grad_log_normalizer(const Family& fam, const NaturalParam& theta) {
  validate(fam, theta);
  const auto& c = theta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: {
      const double t1 = c[0], t2 = c[1];
      return {{-t1 / (2.0 * t2), -1.0 / (2.0 * t2) + t1 * t1 / (4.0 * t2 * t2)}};
    }
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, true);
      const SpdMatrix tm(v.mat);
      // theta_M = 1/2 Sigma^{-1}, so Sigma = 1/2 theta_M^{-1} and mu = Sigma theta_v.
      const Matrix sigma = 0.5 * spd_inverse(tm).matrix();
      const Vector mu = sigma * std::span<const double>(v.vec);
      const Matrix second = -1.0 * (sigma + outer(mu, mu));
      return {join(mu, pack_symmetric(second, false))};
    }
    case FamilyTag::CenteredMvn: {
      const SpdMatrix t(unpack_symmetric(c, d, true));
      return {pack_symmetric(-0.5 * spd_inverse(t).matrix(), false)};
    }
    case FamilyTag::Categorical: {
      const double lf = log1p_sum_exp(c);
      Vector eta(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) eta[i] = std::exp(c[i] - lf);
      return {eta};
    }
    case FamilyTag::Isotropic: return {c};
  }
  return {};
}

NaturalParam theta_from_eta(const Family& fam, const MomentParam& eta) {
  validate(fam, eta);
  const auto& c = eta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: {
      const double e1 = c[0], e2 = c[1];
      const double g = e1 * e1 - e2;
      return {{-e1 / g, 1.0 / (2.0 * g)}};
    }
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, false);
      return natural_from_gaussian({v.vec, SpdMatrix(-1.0 * (v.mat + outer(v.vec, v.vec)))});
    }
    case FamilyTag::CenteredMvn:
      return natural_from_covariance(SpdMatrix(-2.0 * unpack_symmetric(c, d, false)));
    case FamilyTag::Categorical: {
      const double rest = categorical_remainder(c);
      Vector theta(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) theta[i] = std::log(c[i] / rest);
      return {theta};
    }
    case FamilyTag::Isotropic: return {c};
  }
  return {};
}

double conjugate(const Family& fam, const MomentParam& eta) {
  validate(fam, eta);
  const auto& c = eta.coords;
  const std::size_t d = fam.dim();
  const double dd = static_cast<double>(d);
  switch (fam.tag()) {
    case FamilyTag::UniGaussian:
      return -0.5 * std::log(2.0 * kPi * std::numbers::e * (c[1] - c[0] * c[0]));
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, false);
      const SpdMatrix sigma(-1.0 * (v.mat + outer(v.vec, v.vec)));
      return -0.5 * log_det(sigma) - 0.5 * dd * (1.0 + kLog2Pi);
    }
    case FamilyTag::CenteredMvn: {
      const SpdMatrix sigma(-2.0 * unpack_symmetric(c, d, false));
      return -0.5 * log_det(sigma) - 0.5 * dd * (1.0 + kLog2Pi);
    }
    case FamilyTag::Categorical: {
      double s = xlogx(categorical_remainder(c));
      for (double e : c) s += xlogx(e);
      return s;
    }
    case FamilyTag::Isotropic: return 0.5 * dot(c, c) - 0.5 * dd * kLog2Pi;
  }
  return 0.0;
}

NaturalParam theta_from_ordinary(const Family& fam, const OrdinaryParam& lambda) {
  const auto& c = lambda.coords;
  const std::size_t d = fam.dim();
  if (!all_finite(c)) throw Error(ErrorCode::OutOfDomain, "non-finite ordinary parameter");
  switch (fam.tag()) {
    case FamilyTag::UniGaussian:
      require_length(c, 2, "ordinary parameter (mu, v)");
      if (!(c[1] > 0.0)) throw Error(ErrorCode::OutOfDomain, "variance must be positive");
      return uni_natural(c[0], c[1]);
    case FamilyTag::MvnGaussian: {
      require_length(c, d + packed_size(d), "ordinary parameter (mu, Sigma)");
      const MvnView v = split_mvn(c, d, false);
      return natural_from_gaussian({v.vec, SpdMatrix(v.mat)});
    }
    case FamilyTag::CenteredMvn:
      require_length(c, packed_size(d), "ordinary parameter Sigma");
      return natural_from_covariance(SpdMatrix(unpack_symmetric(c, d, false)));
    case FamilyTag::Categorical: {
      require_length(c, d, "probability vector");
      if (!std::all_of(c.begin(), c.end(), [](double p) { return p > 0.0; })) {
        throw Error(ErrorCode::OutOfDomain, "probabilities must be positive");
      }
      Vector theta(d - 1);
      for (std::size_t i = 0; i + 1 < d; ++i) theta[i] = std::log(c[i] / c[d - 1]);
      return {theta};
    }
    case FamilyTag::Isotropic:
      require_length(c, d, "mean");
      return {c};
  }
  return {};
}

OrdinaryParam ordinary_from_theta(const Family& fam, const NaturalParam& theta) {
  validate(fam, theta);
  const auto& c = theta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: return {{-c[0] / (2.0 * c[1]), -1.0 / (2.0 * c[1])}};
    case FamilyTag::MvnGaussian: {
      const GaussianParams g = gaussian_from_natural(theta, d);
      return {join(g.mean, pack_symmetric(g.cov.matrix(), false))};
    }
    case FamilyTag::CenteredMvn:
      return {pack_symmetric(covariance_from_natural(theta, d).matrix(), false)};
    case FamilyTag::Categorical: {
      const double lf = log1p_sum_exp(c);
      Vector p(d);
      for (std::size_t i = 0; i + 1 < d; ++i) p[i] = std::exp(c[i] - lf);
      p[d - 1] = std::exp(-lf);
      return {p};
    }
    case FamilyTag::Isotropic: return {c};
  }
  return {};
}

MomentParam eta_from_ordinary(const Family& fam, const OrdinaryParam& lambda) {
  const auto& c = lambda.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian:
      require_length(c, 2, "ordinary parameter (mu, v)");
      if (!(c[1] > 0.0)) throw Error(ErrorCode::OutOfDomain, "variance must be positive");
      return {{c[0], c[0] * c[0] + c[1]}};
    case FamilyTag::MvnGaussian: {
      require_length(c, d + packed_size(d), "ordinary parameter (mu, Sigma)");
      const MvnView v = split_mvn(c, d, false);
      const SpdMatrix sigma(v.mat);
      return {join(v.vec, pack_symmetric(-1.0 * (sigma.matrix() + outer(v.vec, v.vec)), false))};
    }
    case FamilyTag::CenteredMvn: {
      require_length(c, packed_size(d), "ordinary parameter Sigma");
      const SpdMatrix sigma(unpack_symmetric(c, d, false));
      return {pack_symmetric(-0.5 * sigma.matrix(), false)};
    }
    case FamilyTag::Categorical:
      // Validated through theta to share the positivity checks.
      theta_from_ordinary(fam, lambda);
      return {Vector(c.begin(), c.end() - 1)};
    case FamilyTag::Isotropic:
      require_length(c, d, "mean");
      return {c};
  }
  return {};
}

OrdinaryParam ordinary_from_eta(const Family& fam, const MomentParam& eta) {
  validate(fam, eta);
  const auto& c = eta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian: return {{c[0], c[1] - c[0] * c[0]}};
    case FamilyTag::MvnGaussian: {
      const MvnView v = split_mvn(c, d, false);
      const Matrix sigma = -1.0 * (v.mat + outer(v.vec, v.vec));
      return {join(v.vec, pack_symmetric(sigma, false))};
    }
    case FamilyTag::CenteredMvn:
      return {pack_symmetric(-2.0 * unpack_symmetric(c, d, false), false)};
    case FamilyTag::Categorical: {
      Vector p(c.begin(), c.end());
      p.push_back(categorical_remainder(c));
      return {p};
    }
    case FamilyTag::Isotropic: return {c};
  }
  return {};
}

double log_density(const Family& fam, const NaturalParam& theta, std::span<const double> x) {
  const double f = log_normalizer(fam, theta);
  const auto& c = theta.coords;
  const std::size_t d = fam.dim();
  switch (fam.tag()) {
    case FamilyTag::UniGaussian:
      require_length(x, 1, "point");
      return c[0] * x[0] + c[1] * x[0] * x[0] - f;
    case FamilyTag::MvnGaussian: {
      require_length(x, d, "point");
      const MvnView v = split_mvn(c, d, true);
      // <theta, (x, -x x^T)>
      const Vector mx = v.mat * x;
      return dot(v.vec, x) - dot(x, mx) - f;
    }
    case FamilyTag::CenteredMvn: {
      require_length(x, d, "point");
      const Matrix t = unpack_symmetric(c, d, true);
      const Vector tx = t * x;
      return -0.5 * dot(x, tx) - f;
    }
    case FamilyTag::Categorical: {
      require_length(x, 1, "category index");
      const double idx = x[0];
      if (idx < 0.0 || idx >= static_cast<double>(d) || std::floor(idx) != idx) {
        throw Error(ErrorCode::OutOfDomain, fmt::format("category {} outside [0, {})", idx, d));
      }
      const auto k = static_cast<std::size_t>(idx);
      return (k + 1 < d ? c[k] : 0.0) - f;
    }
    case FamilyTag::Isotropic:
      require_length(x, d, "point");
      return dot(c, x) - f - 0.5 * dot(x, x);
  }
  return 0.0;
}

double density(const Family& fam, const NaturalParam& theta, std::span<const double> x) {
  return std::exp(log_density(fam, theta, x));
}

NaturalParam natural_from_gaussian(const GaussianParams& g) {
  if (g.mean.size() != g.cov.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("mean of dimension {} with covariance of dimension {}", g.mean.size(), g.cov.dim()));
  }
  const SpdMatrix prec = spd_inverse(g.cov);
  const Vector tv = prec.matrix() * std::span<const double>(g.mean);
  return {join(tv, pack_symmetric(0.5 * prec.matrix(), true))};
}

GaussianParams gaussian_from_natural(const NaturalParam& theta, std::size_t d) {
  require_length(theta.coords, d + packed_size(d), "MVN natural parameter");
  const MvnView v = split_mvn(theta.coords, d, true);
  const SpdMatrix tm(v.mat);
  SpdMatrix sigma(0.5 * spd_inverse(tm).matrix());
  Vector mu = sigma.matrix() * std::span<const double>(v.vec);
  return {std::move(mu), std::move(sigma)};
}

NaturalParam natural_from_covariance(const SpdMatrix& cov) {
  return {pack_symmetric(spd_inverse(cov).matrix(), true)};
}

SpdMatrix covariance_from_natural(const NaturalParam& theta, std::size_t d) {
  return spd_inverse(SpdMatrix(unpack_symmetric(theta.coords, d, true)));
}

NaturalParam uni_natural(double mu, double v) {
  if (!(v > 0.0) || !std::isfinite(v) || !std::isfinite(mu)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("invalid univariate Gaussian ({}, {})", mu, v));
  }
  return {{mu / v, -1.0 / (2.0 * v)}};
}

}  // namespace expfam
}  // namespace ckit
