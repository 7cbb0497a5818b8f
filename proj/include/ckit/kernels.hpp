#pragma once

// Data-parallel loops behind the oracle and the batch Chernoff helper. Each
// kernel has a serial and an OpenMP path over the same fixed block partition,
// with block partials combined in block order, so both paths return
// bit-identical results for any thread count.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ckit/expfam.hpp"
#include "ckit/linalg.hpp"
#include "ckit/oracle.hpp"

namespace ckit::kernels {

enum class Exec { Serial, Parallel };

inline constexpr std::size_t kTrapezoidBlock = 1 << 14;
inline constexpr std::uint64_t kSampleBlock = 1 << 15;

/// Threads an Exec::Parallel call may use.
int thread_count();

/// Composite trapezoid rule on n >= 2 equally spaced points of [lo, hi].
double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n, Exec exec);

struct SampleMoments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations
  bool unbounded = false;
};

/// Moments of log p(X) - log q(X), X ~ p. Block b draws from its own
/// mt19937_64 seeded from (seed, b), so the sample does not depend on Exec.
SampleMoments log_ratio_moments(const Density1D& p, const Density1D& q, std::uint64_t n,
                                std::uint64_t seed, Exec exec);

/// f applied to every x; an exception from any element is rethrown (the
/// lowest index wins).
std::vector<double> map_values(const std::function<double(double)>& f, std::span<const double> xs,
                               Exec exec);

/// Symmetric matrix of pairwise Chernoff information, zero diagonal.
Matrix pairwise_chernoff(const std::vector<GaussianParams>& params, double eps, Exec exec);

/// Stream seed for block `block` of a run seeded with `seed`.
std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block);

}  // namespace ckit::kernels
