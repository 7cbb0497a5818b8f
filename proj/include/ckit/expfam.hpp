#pragma once

// Exponential families p_theta(x) = exp(<theta, t(x)> - F(theta) + k(x)).
//
// Coordinate packing:
//   * NaturalParam and MomentParam are flat vectors. Matrix blocks are stored
//     as their upper triangle (row-major over i <= j). In natural coordinates
//     the off-diagonal entries are doubled, in moment coordinates they are not,
//     so dot(theta, eta) reproduces the trace inner product Tr(A^T B) and the
//     gradient of F with respect to the packed theta is the packed eta.
//   * Constants such as (d/2) log(2 pi) live inside F; each family's carrier
//     k(x) only holds x-dependent terms.
//
// Families:
//   UniGaussian    t(x) = (x, x^2)        theta = (mu/v, -1/(2v))
//                  F = -theta1^2/(4 theta2) + 1/2 log(pi / -theta2), k = 0
//   MvnGaussian    t(x) = (x, -x x^T)     theta = (S^-1 mu, 1/2 S^-1)
//                  F = 1/4 tv^T tM^-1 tv - 1/2 log|tM| + d/2 log(pi), k = 0
//   CenteredMvn    t(x) = -1/2 x x^T      theta = S^-1
//                  F = -1/2 log|theta| + d/2 log(2 pi), k = 0
//   Categorical    t(x) = e_x (zero for the last category)
//                  theta_i = log(p_i / p_d), F = log(1 + sum exp theta_i), k = 0
//   Isotropic      unit-covariance Gaussian N(theta, I), t(x) = x
//                  F = 1/2 |theta|^2 + d/2 log(2 pi), k = -1/2 |x|^2
//                  (the squared-Euclidean Bregman generator)
//
// Ordinary parameters:
//   UniGaussian (mu, v); MvnGaussian (mu, upper(S)); CenteredMvn upper(S);
//   Categorical the full probability vector (length d); Isotropic the mean.

#include <cstddef>
#include <span>
#include <string>

#include "ckit/linalg.hpp"

namespace ckit {

struct NaturalParam {
  Vector coords;
};

struct MomentParam {
  Vector coords;
};

struct OrdinaryParam {
  Vector coords;
};

struct GaussianParams {
  Vector mean;
  SpdMatrix cov;

  std::size_t dim() const noexcept { return mean.size(); }
  static GaussianParams standard(std::size_t d) {
    return {Vector(d, 0.0), SpdMatrix::identity(d)};
  }
  static GaussianParams univariate(double mu, double v);
};

enum class FamilyTag { UniGaussian, MvnGaussian, CenteredMvn, Categorical, Isotropic };

class Family {
 public:
  static Family uni_gaussian() { return Family(FamilyTag::UniGaussian, 1); }
  static Family mvn(std::size_t d);
  static Family centered_mvn(std::size_t d);
  /// d categories, natural dimension d - 1.
  static Family categorical(std::size_t d);
  static Family isotropic(std::size_t d);

  FamilyTag tag() const noexcept { return tag_; }
  /// Event-space dimension (number of categories for Categorical).
  std::size_t dim() const noexcept { return dim_; }
  std::size_t natural_dim() const noexcept;
  bool has_conjugate() const noexcept { return true; }
  std::string name() const;

  friend bool operator==(const Family&, const Family&) = default;

 private:
  Family(FamilyTag tag, std::size_t dim) : tag_(tag), dim_(dim) {}
  FamilyTag tag_;
  std::size_t dim_;
};

namespace expfam {

bool in_natural_domain(const Family& fam, const NaturalParam& theta);
bool in_moment_domain(const Family& fam, const MomentParam& eta);
/// Throws OutOfDomain (or DimMismatch on a wrong length).
void validate(const Family& fam, const NaturalParam& theta);
void validate(const Family& fam, const MomentParam& eta);

double log_normalizer(const Family& fam, const NaturalParam& theta);
MomentParam grad_log_normalizer(const Family& fam, const NaturalParam& theta);
/// Legendre conjugate F*(eta) = <theta(eta), eta> - F(theta(eta)).
double conjugate(const Family& fam, const MomentParam& eta);

inline MomentParam eta_from_theta(const Family& fam, const NaturalParam& theta) {
  return grad_log_normalizer(fam, theta);
}
NaturalParam theta_from_eta(const Family& fam, const MomentParam& eta);
NaturalParam theta_from_ordinary(const Family& fam, const OrdinaryParam& lambda);
OrdinaryParam ordinary_from_theta(const Family& fam, const NaturalParam& theta);
MomentParam eta_from_ordinary(const Family& fam, const OrdinaryParam& lambda);
OrdinaryParam ordinary_from_eta(const Family& fam, const MomentParam& eta);

/// Density at x. For Categorical, x[0] is the 0-based category index.
double density(const Family& fam, const NaturalParam& theta, std::span<const double> x);
double log_density(const Family& fam, const NaturalParam& theta, std::span<const double> x);

/// alpha * a + (1 - alpha) * b, coordinate-wise.
Vector lerp(double alpha, std::span<const double> a, std::span<const double> b);
inline NaturalParam lerp(double alpha, const NaturalParam& a, const NaturalParam& b) {
  return {lerp(alpha, a.coords, b.coords)};
}
inline MomentParam lerp(double alpha, const MomentParam& a, const MomentParam& b) {
  return {lerp(alpha, a.coords, b.coords)};
}

// Gaussian helpers for the MvnGaussian / CenteredMvn / UniGaussian families.
NaturalParam natural_from_gaussian(const GaussianParams& g);
GaussianParams gaussian_from_natural(const NaturalParam& theta, std::size_t d);
NaturalParam natural_from_covariance(const SpdMatrix& cov);
SpdMatrix covariance_from_natural(const NaturalParam& theta, std::size_t d);
NaturalParam uni_natural(double mu, double v);

/// Upper-triangle packing of a symmetric matrix; `double_offdiag` selects
/// the natural-coordinate convention.
Vector pack_symmetric(const Matrix& m, bool double_offdiag);
Matrix unpack_symmetric(std::span<const double> packed, std::size_t d, bool doubled_offdiag);
inline std::size_t packed_size(std::size_t d) { return d * (d + 1) / 2; }

}  // namespace expfam
}  // namespace ckit
