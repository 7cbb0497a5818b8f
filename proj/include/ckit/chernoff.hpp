#pragma once

// Chernoff information D_C[p:q] = max_{alpha in (0,1)} D_{B,alpha}[p:q].
//
// Orientation: alpha = 1 is the first distribution p and alpha = 0 the second,
// so the geometric mixture is (pq)_alpha ~ p^alpha q^(1-alpha). Every solver in
// this header reports alpha_star in that convention. The geodesic helpers are
// the exception; they follow the usual path convention gamma(0) = p1,
// gamma(1) = p2.

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "ckit/expfam.hpp"
#include "ckit/linalg.hpp"

namespace ckit {

enum class Method { ClosedForm, Bisection, EigRoot };

std::string_view to_string(Method m);

struct ChernoffResult {
  double alpha_star = 0.5;
  double value = 0.0;
  int iterations = 0;
  /// |KL[(pq)_a : p] - KL[(pq)_a : q]| at the returned alpha, which is also
  /// the magnitude of the dual optimality residual.
  double residual = 0.0;
  Method method = Method::ClosedForm;
  /// Set when p == q; value is 0 and alpha_star the placeholder 0.5.
  bool degenerate = false;
};

struct LrefPair {
  Family fam;
  NaturalParam theta_p;
  NaturalParam theta_q;
};

struct GeodesicPoint {
  double alpha;
  GaussianParams params;
};

struct PairwiseMin {
  double value;
  std::size_t i;
  std::size_t j;
};

inline constexpr double kDefaultEps = 1e-8;

namespace chernoff {

LrefPair uni_gaussian_pair(double mu1, double v1, double mu2, double v2);

/// F_pq(alpha) = -D_{B,alpha}[p:q]; zero at alpha in {0, 1}.
double lref_log_normalizer(const LrefPair& pair, double alpha);

/// (theta_q - theta_p)^T grad F(theta_alpha) - (F(theta_q) - F(theta_p)).
/// Decreasing in alpha; equals KL[q:p] at 0 and -KL[p:q] at 1.
double dual_residual(const LrefPair& pair, double alpha);

/// Dichotomic search on the sign of B_F(theta_p:theta_alpha) - B_F(theta_q:theta_alpha).
/// Runs ceil(log2(1/eps)) halvings and reports the final midpoint; iterations
/// counts midpoint evaluations, so eps = 1e-8 gives 28.
ChernoffResult chernoff_bisect(const LrefPair& pair, double eps = kDefaultEps);

/// Exact solution for two univariate normals N(mu1, v1), N(mu2, v2).
ChernoffResult chernoff_gauss1d_closed(double mu1, double v1, double mu2, double v2);

/// Dichotomic search for multivariate normals using the geometric mixture
/// in (mu, Sigma) form and closed-form Gaussian KL comparisons.
ChernoffResult chernoff_gauss_nd(const GaussianParams& p1, const GaussianParams& p2,
                                 double eps = kDefaultEps);

/// D_C[N(mu, Sigma) : N(mu, s Sigma)] in dimension d; independent of Sigma.
ChernoffResult chernoff_scaled_centered(std::size_t d, double s);

/// Centered normals N(0, s1), N(0, s2): root of
/// sum_i (1 - l_i)/(alpha + (1 - alpha) l_i) + log l_i = 0 over the spectrum of s1 s2^-1.
ChernoffResult chernoff_centered(const SpdMatrix& s1, const SpdMatrix& s2, double eps = kDefaultEps);

/// (S1^-1/2 (mu2 - mu1), S1^-1/2 S2 S1^-1/2): the pair (N(0, I), N(mu12, S12)) has the
/// same Chernoff information and exponent as (p1, p2).
std::pair<Vector, SpdMatrix> canonical_reduce(const GaussianParams& p1, const GaussianParams& p2);

/// Natural-parameter (exponential) interpolation, gamma(0) = p1, gamma(1) = p2.
GeodesicPoint geodesic_e(const GaussianParams& p1, const GaussianParams& p2, double alpha);
/// Moment-parameter (mixture) interpolation, gamma(0) = p1, gamma(1) = p2.
GeodesicPoint geodesic_m(const GaussianParams& p1, const GaussianParams& p2, double alpha);

/// Smallest pairwise Chernoff information; ties go to the lowest (i, j).
PairwiseMin chernoff_pairwise_min(const std::vector<GaussianParams>& params, double eps = kDefaultEps);

}  // namespace chernoff
}  // namespace ckit
