#pragma once

// Divergences between members of an exponential family, in nats.
// Skewed quantities use the convention alpha weights the first argument:
//   J_{F,alpha}(t1:t2) = alpha F(t1) + (1-alpha) F(t2) - F(alpha t1 + (1-alpha) t2).

#include <span>

#include "ckit/expfam.hpp"
#include "ckit/linalg.hpp"

namespace ckit::div {

/// B_F(t1:t2) = F(t1) - F(t2) - <t1 - t2, grad F(t2)>
double bregman(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2);
/// B_{F*}(e1:e2) computed in moment coordinates.
double bregman_dual(const Family& fam, const MomentParam& eta1, const MomentParam& eta2);
/// F(t1) + F*(e2) - <t1, e2>
double fenchel_young(const Family& fam, const NaturalParam& theta1, const MomentParam& eta2);

/// Throws AlphaOutOfRange unless 0 < alpha < 1.
double skew_jensen(const Family& fam, double alpha, const NaturalParam& theta1,
                   const NaturalParam& theta2);
/// Skew Jensen of F* on moment coordinates.
double skew_jensen_dual(const Family& fam, double alpha, const MomentParam& eta1,
                        const MomentParam& eta2);
/// -log int p1^alpha p2^(1-alpha)
double bhattacharyya_alpha(const Family& fam, double alpha, const NaturalParam& theta1,
                           const NaturalParam& theta2);
double renyi(const Family& fam, double alpha, const NaturalParam& theta1, const NaturalParam& theta2);
/// KL[p_t1 : p_t2] = B_F(t2:t1)
double kld_expfam(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2);

double jeffreys_bregman(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2);
double jensen_shannon_bregman(const Family& fam, const NaturalParam& theta1,
                              const NaturalParam& theta2);

/// KL[N(mu1,S1) : N(mu2,S2)] = 1/2 (tr(S2^-1 S1) + log(|S2|/|S1|) - d + (mu2-mu1)^T S2^-1 (mu2-mu1))
double kld_gauss(const GaussianParams& p1, const GaussianParams& p2);
/// sum_i (l_i - log l_i - 1) over the spectrum of s1 s2^-1.
double burg(const SpdMatrix& s1, const SpdMatrix& s2);
double mahalanobis_sq(const SpdMatrix& cov, std::span<const double> mu1, std::span<const double> mu2);

namespace detail {
/// Gaussian Bhattacharyya distance written directly in (mu, Sigma); used to
/// cross-check the natural-parameter path.
double bhattacharyya_gauss_direct(double alpha, const GaussianParams& p1, const GaussianParams& p2);
}  // namespace detail

}  // namespace ckit::div
