#pragma once

// Independent numerical checks for one-dimensional densities: adaptive
// quadrature of the skewed Bhattacharyya coefficient, a grid search for the
// Chernoff exponent, and a Monte-Carlo KL estimator. Nothing here relies on
// exponential-family structure.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

namespace ckit {

enum class DensityTag { Normal, Exponential, HalfNormal, Cauchy };

class Density1D {
 public:
  /// N(mu, v), v the variance.
  static Density1D normal(double mu, double v);
  /// rate lambda on [0, inf)
  static Density1D exponential(double lambda);
  /// |N(0, sigma^2)| on [0, inf)
  static Density1D half_normal(double sigma);
  static Density1D cauchy(double loc, double scale);
  /// "normal:0,1", "exponential:1", "halfnormal:1", "cauchy:0,1".
  static Density1D parse(std::string_view spec);

  DensityTag tag() const noexcept { return tag_; }
  double lower() const noexcept;
  double upper() const noexcept;
  /// A representative location (mean, or median for Cauchy).
  double center() const noexcept;
  /// A representative spread, used to scale tail maps.
  double spread() const noexcept;

  double log_pdf(double x) const;
  double pdf(double x) const;
  /// One draw from 53-bit uniforms of `rng`, so the stream is reproducible
  /// across standard libraries.
  double sample(std::mt19937_64& rng) const;

  std::string describe() const;

 private:
  Density1D(DensityTag tag, double a, double b);
  DensityTag tag_;
  double a_;
  double b_;
};

/// Uniform on (0, 1) from the top 53 bits of one 64-bit draw.
double uniform_open(std::mt19937_64& rng);

/// Adaptive Simpson integral of f over [lo, hi]; infinite ends are mapped
/// through x = c +- s t/(1 - t). Throws QuadratureNonConvergent past 2^20 panels.
double integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                 double scale = 1.0, double split = 0.0);

namespace oracle {

/// int p^alpha q^(1-alpha) over the common support.
double bhattacharyya_coeff_quad(const Density1D& p, const Density1D& q, double alpha,
                                double abs_tol = 1e-12);

/// int p for checking normalization.
double total_mass(const Density1D& p, double abs_tol = 1e-10);

struct GridResult {
  double alpha;
  double value;
  int evaluations;
};

/// Coarse maximum of -log rho_alpha on the grid k/(grid_n + 1), k = 1..grid_n,
/// refined by golden section to a bracket of width refine_tol.
GridResult chernoff_grid(const Density1D& p, const Density1D& q, int grid_n = 101,
                         double refine_tol = 1e-9, double quad_tol = 1e-12);

struct McResult {
  double estimate;
  double std_error;
  std::uint64_t n;
};

/// Mean of log(p/q) over n draws from p.
McResult kld_monte_carlo(const Density1D& p, const Density1D& q, std::uint64_t n, std::uint64_t seed);

/// Composite trapezoid estimate of int_lo^hi p^alpha q^(1-alpha) on n points.
double bhattacharyya_coeff_trapezoid(const Density1D& p, const Density1D& q, double alpha, double lo,
                                     double hi, std::size_t n = 1000000);

}  // namespace oracle
}  // namespace ckit
