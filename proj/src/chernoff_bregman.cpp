#include "ckit/chernoff_bregman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/core.h>

#include "ckit/divergences.hpp"
#include "ckit/errors.hpp"

namespace ckit::cbd {

namespace {

struct Skewed {
  std::function<double(double)> value;  // skew Jensen at a
  std::function<double(double)> gap;    // its derivative, B(p1 : c_a) - B(p2 : c_a)
};

struct Optimum {
  double alpha;
  double value;
  double gap;
  int iterations;
};

// Maximizes a strictly concave objective on (0, 1). Golden section first;
// once the objective is too flat to compare reliably the sign of its
// derivative finishes the job.
Optimum maximize(const Skewed& f, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("tol = {} must be positive", tol));
  constexpr double kInvPhi = 0.6180339887498948482;
  constexpr int kMaxIter = 400;

  int it = 0;
  double a = 0.0, b = 1.0;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f.value(x1), f2 = f.value(x2);
  while (b - a > tol && it < kMaxIter) {
    ++it;
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f.value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f.value(x1);
    }
  }

  double alpha = 0.5 * (a + b);
  double g = f.gap(alpha);
  if (std::abs(g) > tol) {
    double lo = a, hi = b;
    if (!(f.gap(lo) > 0.0 && f.gap(hi) < 0.0)) {
      lo = 0.0;
      hi = 1.0;
    }
    while (std::abs(g) > tol && it < kMaxIter && hi - lo > 0.0) {
      ++it;
      (g > 0.0 ? lo : hi) = alpha;
      const double next = 0.5 * (lo + hi);
      if (next == alpha) break;
      alpha = next;
      g = f.gap(alpha);
    }
  }
  return {alpha, f.value(alpha), std::abs(g), it};
}

BallResult degenerate_ball(const Vector& center, Coords coords) {
  BallResult r;
  r.center = center;
  r.coords = coords;
  r.degenerate = true;
  return r;
}

}  // namespace

BallResult forward_cbd(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                       double tol) {
  expfam::validate(fam, theta1);
  expfam::validate(fam, theta2);
  if (theta1.coords == theta2.coords) return degenerate_ball(theta1.coords, Coords::Natural);

  const double f1 = expfam::log_normalizer(fam, theta1);
  const double f2 = expfam::log_normalizer(fam, theta2);
  Vector diff(theta1.coords.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = theta1.coords[i] - theta2.coords[i];

  const Skewed obj{
      [&](double a) { return div::skew_jensen(fam, a, theta1, theta2); },
      [&](double a) {
        const MomentParam eta = expfam::grad_log_normalizer(fam, expfam::lerp(a, theta1, theta2));
        return f1 - f2 - dot(diff, eta.coords);
      }};
  const Optimum opt = maximize(obj, tol);

  BallResult r;
  r.center = expfam::lerp(opt.alpha, theta1.coords, theta2.coords);
  r.coords = Coords::Natural;
  r.radius = opt.value;
  r.iterations = opt.iterations;
  r.alpha_star = opt.alpha;
  r.gap = opt.gap;
  return r;
}

BallResult forward_cbd_bc(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                          int iters) {
  if (iters < 1) throw Error(ErrorCode::InvalidArgument, fmt::format("iters = {} must be >= 1", iters));
  expfam::validate(fam, theta1);
  expfam::validate(fam, theta2);
  if (theta1.coords == theta2.coords) {
    BallResult r = degenerate_ball(theta1.coords, Coords::Natural);
    r.iterations = iters;
    return r;
  }

  // F(t2) - F(t1) - (t2 - t1)^T grad F(c) = B(t2 : c) - B(t1 : c); only
  // the gradient at the current center changes between steps.
  const double f1 = expfam::log_normalizer(fam, theta1);
  const double f2 = expfam::log_normalizer(fam, theta2);
  Vector diff(theta1.coords.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = theta2.coords[i] - theta1.coords[i];

  // The center is w theta1 + (1 - w) theta2; tracking w keeps it exactly on the segment.
  double w = 0.5;
  for (int i = 1; i <= iters; ++i) {
    const NaturalParam c{expfam::lerp(w, theta1.coords, theta2.coords)};
    const double s = f2 - f1 - dot(diff, expfam::grad_log_normalizer(fam, c).coords);
    const double target = s < 0.0 ? 1.0 : 0.0;  // s < 0: theta1 is farther
    const double step = 1.0 / (i + 1.0);
    w = (1.0 - step) * w + step * target;
  }

  const NaturalParam c{expfam::lerp(w, theta1.coords, theta2.coords)};
  const double b1 = div::bregman(fam, theta1, c);
  const double b2 = div::bregman(fam, theta2, c);
  BallResult r;
  r.center = c.coords;
  r.coords = Coords::Natural;
  r.radius = std::max(b1, b2);
  r.iterations = iters;
  r.alpha_star = w;
  r.gap = std::abs(b1 - b2);
  return r;
}

BallResult reverse_cbd(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                       double tol) {
  if (!fam.has_conjugate()) {
    throw Error(ErrorCode::ConjugateUnavailable, fmt::format("{} has no closed-form conjugate", fam.name()));
  }
  const MomentParam eta1 = expfam::eta_from_theta(fam, theta1);
  const MomentParam eta2 = expfam::eta_from_theta(fam, theta2);
  if (theta1.coords == theta2.coords) return degenerate_ball(eta1.coords, Coords::Moment);

  const double g1 = expfam::conjugate(fam, eta1);
  const double g2 = expfam::conjugate(fam, eta2);
  Vector diff(eta1.coords.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = eta1.coords[i] - eta2.coords[i];

  const Skewed obj{
      [&](double a) { return div::skew_jensen_dual(fam, a, eta1, eta2); },
      [&](double a) {
        const NaturalParam th = expfam::theta_from_eta(fam, expfam::lerp(a, eta1, eta2));
        return g1 - g2 - dot(diff, th.coords);
      }};
  const Optimum opt = maximize(obj, tol);

  BallResult r;
  r.center = expfam::lerp(opt.alpha, eta1.coords, eta2.coords);
  r.coords = Coords::Moment;
  r.radius = opt.value;
  r.iterations = opt.iterations;
  r.alpha_star = opt.alpha;
  r.gap = opt.gap;
  return r;
}

RedundancyResult minimax_redundancy(const Vector& dist1, const Vector& dist2, double tol) {
  auto check = [](const Vector& p, const char* which) {
    if (p.size() < 2) {
      throw Error(ErrorCode::InvalidSimplexPoint, fmt::format("{} needs at least two entries", which));
    }
    for (double x : p) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::InvalidSimplexPoint, fmt::format("{} has a non-positive entry {}", which, x));
      }
    }
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidSimplexPoint, fmt::format("{} sums to {}, not 1", which, s));
    }
  };
  check(dist1, "dist1");
  check(dist2, "dist2");
  if (dist1.size() != dist2.size()) {
    throw Error(ErrorCode::InvalidSimplexPoint,
                fmt::format("distributions have {} and {} outcomes", dist1.size(), dist2.size()));
  }

  const Family fam = Family::categorical(dist1.size());
  const NaturalParam t1 = expfam::theta_from_ordinary(fam, {dist1});
  const NaturalParam t2 = expfam::theta_from_ordinary(fam, {dist2});
  RedundancyResult r;
  r.ball = reverse_cbd(fam, t1, t2, tol);
  r.redundancy = r.ball.radius;
  r.coding = expfam::ordinary_from_eta(fam, {r.ball.center}).coords;
  return r;
}

}  // namespace ckit::cbd
