#pragma once

// Chernoff-Bregman divergences of two parameters: radii of the smallest
// Bregman balls enclosing both points.
//   forward  C_F(t1, t2)   = max_a J_{F,a}(t1:t2) = min_t max_i B_F(t_i : t)
//   reverse  C_F^R(t1, t2) = min_t max_i B_F(t : t_i)  (left-sided ball)
// The reverse problem is solved as the forward one for F* on moment
// coordinates, since B_F(t : t_i) = B_{F*}(e_i : e).

#include "ckit/expfam.hpp"

namespace ckit {

enum class Coords { Natural, Moment };

struct BallResult {
  Vector center;
  Coords coords = Coords::Natural;
  double radius = 0.0;
  int iterations = 0;
  /// Weight of the first parameter in the center.
  double alpha_star = 0.5;
  /// |B(p1 : c) - B(p2 : c)| (or the left-sided analogue) at the center.
  double gap = 0.0;
  bool degenerate = false;
};

struct RedundancyResult {
  double redundancy = 0.0;
  /// The minimax coding distribution (full probability vector).
  Vector coding;
  BallResult ball;
};

namespace cbd {

/// Golden-section maximization of the skew Jensen divergence over alpha until
/// the bracket is at most tol wide, then bisection on the equalization gap
/// until it is at most tol.
BallResult forward_cbd(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                       double tol = 1e-10);

/// Badoiu-Clarkson iteration: start at the midpoint and step 1/(i+1) towards
/// the farther input, for exactly `iters` steps.
BallResult forward_cbd_bc(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                          int iters);

BallResult reverse_cbd(const Family& fam, const NaturalParam& theta1, const NaturalParam& theta2,
                       double tol = 1e-10);

/// R* = min_q max_i KL[p_i : q] for two strictly positive probability vectors.
RedundancyResult minimax_redundancy(const Vector& dist1, const Vector& dist2, double tol = 1e-10);

}  // namespace cbd
}  // namespace ckit
