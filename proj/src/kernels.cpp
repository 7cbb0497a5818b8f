#include "ckit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include <omp.h>

#include <fmt/core.h>

#include "ckit/chernoff.hpp"
#include "ckit/errors.hpp"

namespace ckit::kernels {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Runs body(b) for b in [0, blocks) either serially or as an OpenMP loop.
// Exceptions are captured per block and the first one (in block order) is
// rethrown after the loop.
template <class Body>
void for_blocks(std::size_t blocks, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(blocks);
  const auto n = static_cast<std::ptrdiff_t>(blocks);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < n; ++b) {
      try {
        body(static_cast<std::size_t>(b));
      } catch (...) {
        errors[static_cast<std::size_t>(b)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t b = 0; b < n; ++b) {
      try {
        body(static_cast<std::size_t>(b));
      } catch (...) {
        errors[static_cast<std::size_t>(b)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int thread_count() { return omp_get_max_threads(); }

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  return splitmix64(splitmix64(seed) ^ (block + 1) * 0xD1B54A32D192ED03ULL);
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n, Exec exec) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "trapezoid needs at least two points");
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, fmt::format("empty interval [{}, {}]", lo, hi));
  const double h = (hi - lo) / static_cast<double>(n - 1);
  const std::size_t blocks = (n + kTrapezoidBlock - 1) / kTrapezoidBlock;
  std::vector<double> partial(blocks, 0.0);
  for_blocks(blocks, exec, [&](std::size_t b) {
    const std::size_t begin = b * kTrapezoidBlock;
    const std::size_t end = std::min(n, begin + kTrapezoidBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double x = i + 1 == n ? hi : lo + static_cast<double>(i) * h;
      const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      s += w * f(x);
    }
    partial[b] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return h * total;
}

SampleMoments log_ratio_moments(const Density1D& p, const Density1D& q, std::uint64_t n,
                                std::uint64_t seed, Exec exec) {
  const std::uint64_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  std::vector<SampleMoments> partial(blocks);
  for_blocks(blocks, exec, [&](std::size_t b) {
    std::mt19937_64 rng(block_seed(seed, b));
    const std::uint64_t begin = b * kSampleBlock;
    const std::uint64_t end = std::min<std::uint64_t>(n, begin + kSampleBlock);
    SampleMoments m;
    for (std::uint64_t i = begin; i < end; ++i) {
      const double x = p.sample(rng);
      const double lq = q.log_pdf(x);
      if (lq == -std::numeric_limits<double>::infinity()) {
        m.unbounded = true;
        break;
      }
      const double r = p.log_pdf(x) - lq;
      ++m.count;
      const double delta = r - m.mean;
      m.mean += delta / static_cast<double>(m.count);
      m.m2 += delta * (r - m.mean);
    }
    partial[b] = m;
  });

  // Chan et al. pairwise combination, in block order.
  SampleMoments total;
  for (const auto& m : partial) {
    total.unbounded = total.unbounded || m.unbounded;
    if (m.count == 0) continue;
    const double na = static_cast<double>(total.count);
    const double nb = static_cast<double>(m.count);
    const double nt = na + nb;
    const double delta = m.mean - total.mean;
    total.mean += delta * nb / nt;
    total.m2 += m.m2 + delta * delta * na * nb / nt;
    total.count += m.count;
  }
  return total;
}

std::vector<double> map_values(const std::function<double(double)>& f, std::span<const double> xs,
                               Exec exec) {
  std::vector<double> out(xs.size());
  for_blocks(xs.size(), exec, [&](std::size_t i) { out[i] = f(xs[i]); });
  return out;
}

Matrix pairwise_chernoff(const std::vector<GaussianParams>& params, double eps, Exec exec) {
  const std::size_t n = params.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  Matrix out(n, n);
  for_blocks(pairs.size(), exec, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double v = chernoff::chernoff_gauss_nd(params[i], params[j], eps).value;
    out(i, j) = v;
    out(j, i) = v;
  });
  return out;
}

}  // namespace ckit::kernels
