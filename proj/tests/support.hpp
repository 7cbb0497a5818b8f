#pragma once

// Seeded generators for property tests. Uniforms come straight from the
// 64-bit engine so the streams are the same under any standard library.

#include <cmath>
#include <cstdint>
#include <random>

#include "ckit/expfam.hpp"
#include "ckit/linalg.hpp"

namespace ckit::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  double normal() {
    const double u1 = uniform(0x1.0p-60, 1.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

  Matrix matrix(std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  Vector vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  /// A^T A + d I with A uniform on [-1, 1].
  SpdMatrix spd(std::size_t d) {
    const Matrix a = matrix(d, d);
    return SpdMatrix(a.transpose() * a + static_cast<double>(d) * Matrix::identity(d));
  }

  /// Random SPD matrix with a wider spread of eigenvalues than spd().
  SpdMatrix spd_scaled(std::size_t d, double scale_lo = 0.3, double scale_hi = 3.0) {
    const Matrix a = matrix(d, d);
    Matrix m = (1.0 / static_cast<double>(d)) * (a.transpose() * a);
    for (std::size_t i = 0; i < d; ++i) m(i, i) += uniform(scale_lo, scale_hi);
    return SpdMatrix(m);
  }

  GaussianParams gaussian(std::size_t d, double mean_range = 1.0) {
    return {vector(d, -mean_range, mean_range), spd_scaled(d)};
  }

  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ckit::testing
