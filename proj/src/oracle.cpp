#include "ckit/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <fmt/core.h>

#include "ckit/errors.hpp"
#include "ckit/kernels.hpp"

namespace ckit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kPanelCap = std::size_t{1} << 20;

std::vector<double> parse_numbers(std::string_view s) {
  std::vector<double> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    std::string_view tok = s.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("cannot parse '{}' as a number", tok));
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("{} = {} must be positive and finite", what, v));
  }
}

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
  double tol;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double checked(double v) {
  if (std::isnan(v)) throw Error(ErrorCode::QuadratureNonConvergent, "integrand evaluated to NaN");
  return v;
}

// Adaptive Simpson over a finite interval, starting from 16 panels so that
// narrow features are not missed by a single coarse estimate.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol) {
  constexpr int kInitial = 16;
  std::vector<Panel> stack;
  const double width = (hi - lo) / kInitial;
  for (int k = kInitial - 1; k >= 0; --k) {
    const double a = lo + k * width;
    const double b = k + 1 == kInitial ? hi : lo + (k + 1) * width;
    const double m = 0.5 * (a + b);
    const double fa = checked(f(a)), fm = checked(f(m)), fb = checked(f(b));
    stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol / kInitial});
  }

  double total = 0.0;
  std::size_t panels = 0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    if (++panels > kPanelCap) {
      throw Error(ErrorCode::QuadratureNonConvergent,
                  fmt::format("tolerance {} not reached within {} panels", tol, kPanelCap));
    }
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
    if (!(lm > p.a && m > lm && rm > m && p.b > rm)) {
      throw Error(ErrorCode::QuadratureNonConvergent,
                  fmt::format("interval [{}, {}] cannot be subdivided further", p.a, p.b));
    }
    const double flm = checked(f(lm)), frm = checked(f(rm));
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol) {
      total += left + right + delta / 15.0;
    } else {
      stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol});
      stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol});
    }
  }
  return total;
}

}  // namespace

Density1D::Density1D(DensityTag tag, double a, double b) : tag_(tag), a_(a), b_(b) {
  const double mass = oracle::total_mass(*this);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} integrates to {}", describe(), mass));
  }
}

Density1D Density1D::normal(double mu, double v) {
  if (!std::isfinite(mu)) throw Error(ErrorCode::OutOfDomain, "normal mean must be finite");
  require_positive(v, "normal variance");
  return Density1D(DensityTag::Normal, mu, v);
}

Density1D Density1D::exponential(double lambda) {
  require_positive(lambda, "exponential rate");
  return Density1D(DensityTag::Exponential, lambda, 0.0);
}

Density1D Density1D::half_normal(double sigma) {
  require_positive(sigma, "half-normal scale");
  return Density1D(DensityTag::HalfNormal, sigma, 0.0);
}

Density1D Density1D::cauchy(double loc, double scale) {
  if (!std::isfinite(loc)) throw Error(ErrorCode::OutOfDomain, "Cauchy location must be finite");
  require_positive(scale, "Cauchy scale");
  return Density1D(DensityTag::Cauchy, loc, scale);
}

Density1D Density1D::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("density '{}' is not of the form name:params", spec));
  }
  const std::string_view name = spec.substr(0, colon);
  const std::vector<double> args = parse_numbers(spec.substr(colon + 1));
  auto want = [&](std::size_t n) {
    if (args.size() != n) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("density '{}' takes {} parameter(s), got {}", name, n, args.size()));
    }
  };
  if (name == "normal") {
    want(2);
    return normal(args[0], args[1]);
  }
  if (name == "exponential" || name == "exp") {
    want(1);
    return exponential(args[0]);
  }
  if (name == "halfnormal" || name == "half-normal") {
    want(1);
    return half_normal(args[0]);
  }
  if (name == "cauchy") {
    want(2);
    return cauchy(args[0], args[1]);
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown density '{}'", name));
}

double Density1D::lower() const noexcept {
  return (tag_ == DensityTag::Exponential || tag_ == DensityTag::HalfNormal) ? 0.0 : -kInf;
}

double Density1D::upper() const noexcept { return kInf; }

double Density1D::center() const noexcept {
  switch (tag_) {
    case DensityTag::Normal: return a_;
    case DensityTag::Exponential: return 1.0 / a_;
    case DensityTag::HalfNormal: return a_ * std::sqrt(2.0 / kPi);
    case DensityTag::Cauchy: return a_;
  }
  return 0.0;
}

double Density1D::spread() const noexcept {
  switch (tag_) {
    case DensityTag::Normal: return std::sqrt(b_);
    case DensityTag::Exponential: return 1.0 / a_;
    case DensityTag::HalfNormal: return a_;
    case DensityTag::Cauchy: return b_;
  }
  return 1.0;
}

double Density1D::log_pdf(double x) const {
  switch (tag_) {
    case DensityTag::Normal: {
      const double z = x - a_;
      return -0.5 * std::log(2.0 * kPi * b_) - z * z / (2.0 * b_);
    }
    case DensityTag::Exponential:
      return x < 0.0 ? -kInf : std::log(a_) - a_ * x;
    case DensityTag::HalfNormal:
      return x < 0.0 ? -kInf : 0.5 * std::log(2.0 / kPi) - std::log(a_) - x * x / (2.0 * a_ * a_);
    case DensityTag::Cauchy: {
      const double z = (x - a_) / b_;
      return -std::log(kPi * b_) - std::log1p(z * z);
    }
  }
  return -kInf;
}

double Density1D::pdf(double x) const { return std::exp(log_pdf(x)); }

double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double Density1D::sample(std::mt19937_64& rng) const {
  auto std_normal = [&] {
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  };
  switch (tag_) {
    case DensityTag::Normal: return a_ + std::sqrt(b_) * std_normal();
    case DensityTag::Exponential: return -std::log(uniform_open(rng)) / a_;
    case DensityTag::HalfNormal: return a_ * std::abs(std_normal());
    case DensityTag::Cauchy: return a_ + b_ * std::tan(kPi * (uniform_open(rng) - 0.5));
  }
  return 0.0;
}

std::string Density1D::describe() const {
  switch (tag_) {
    case DensityTag::Normal: return fmt::format("normal({}, {})", a_, b_);
    case DensityTag::Exponential: return fmt::format("exponential({})", a_);
    case DensityTag::HalfNormal: return fmt::format("halfnormal({})", a_);
    case DensityTag::Cauchy: return fmt::format("cauchy({}, {})", a_, b_);
  }
  return "unknown";
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                 double scale, double split) {
  if (!(abs_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadrature tolerance must be positive");
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, fmt::format("empty interval [{}, {}]", lo, hi));
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    return integrate(f, lo, split, 0.5 * abs_tol, scale) + integrate(f, split, hi, 0.5 * abs_tol, scale);
  }
  if (!lo_inf && !hi_inf) return adaptive_simpson(f, lo, hi, abs_tol);

  // x = c + sign s t/(1-t), dx = s dt/(1-t)^2; t = 1 itself is replaced by
  // the largest double below it.
  const double c = lo_inf ? hi : lo;
  const double sign = lo_inf ? -1.0 : 1.0;
  const double t_last = std::nextafter(1.0, 0.0);
  auto g = [&](double t) {
    t = std::min(t, t_last);
    const double u = 1.0 - t;
    const double v = f(c + sign * scale * t / u);
    return v == 0.0 ? 0.0 : v * scale / (u * u);
  };
  return adaptive_simpson(g, 0.0, 1.0, abs_tol);
}

namespace oracle {

double total_mass(const Density1D& p, double abs_tol) {
  return integrate([&](double x) { return p.pdf(x); }, p.lower(), p.upper(), abs_tol, p.spread(),
                   p.center());
}

double bhattacharyya_coeff_quad(const Density1D& p, const Density1D& q, double alpha, double abs_tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in (0, 1)", alpha));
  }
  const double lo = std::max(p.lower(), q.lower());
  const double hi = std::min(p.upper(), q.upper());
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "supports do not intersect");
  const double scale = std::max(p.spread(), q.spread());
  const double split = 0.5 * (p.center() + q.center());
  return integrate([&](double x) { return std::exp(alpha * p.log_pdf(x) + (1.0 - alpha) * q.log_pdf(x)); },
                   lo, hi, abs_tol, scale, split);
}

GridResult chernoff_grid(const Density1D& p, const Density1D& q, int grid_n, double refine_tol,
                         double quad_tol) {
  if (grid_n < 11) throw Error(ErrorCode::InvalidArgument, fmt::format("grid_n = {} must be >= 11", grid_n));
  if (!(refine_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "refine_tol must be positive");
  auto objective = [&](double a) { return -std::log(bhattacharyya_coeff_quad(p, q, a, quad_tol)); };

  std::vector<double> alphas(static_cast<std::size_t>(grid_n));
  for (int k = 0; k < grid_n; ++k) alphas[k] = (k + 1.0) / (grid_n + 1.0);
  const std::vector<double> values = kernels::map_values(objective, alphas, kernels::Exec::Parallel);
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());

  // Concavity puts the maximizer between the grid neighbours of the best node.
  double a = best == 0 ? 0.0 : alphas[best - 1];
  double b = best + 1 == alphas.size() ? 1.0 : alphas[best + 1];
  constexpr double kInvPhi = 0.6180339887498948482;
  int evals = grid_n;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  evals += 2;
  while (b - a > refine_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = objective(x1);
    }
    ++evals;
  }
  const double alpha = 0.5 * (a + b);
  return {alpha, objective(alpha), evals + 1};
}

McResult kld_monte_carlo(const Density1D& p, const Density1D& q, std::uint64_t n, std::uint64_t seed) {
  if (n < 1000) throw Error(ErrorCode::InvalidArgument, fmt::format("n = {} must be at least 1000", n));
  const kernels::SampleMoments m = kernels::log_ratio_moments(p, q, n, seed, kernels::Exec::Parallel);
  if (m.unbounded) {
    throw Error(ErrorCode::UnboundedRatio,
                fmt::format("a draw from {} has zero density under {}", p.describe(), q.describe()));
  }
  const double var = m.m2 / static_cast<double>(m.count - 1);
  return {m.mean, std::sqrt(var / static_cast<double>(m.count)), m.count};
}

double bhattacharyya_coeff_trapezoid(const Density1D& p, const Density1D& q, double alpha, double lo,
                                     double hi, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, fmt::format("alpha = {} is not in (0, 1)", alpha));
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "trapezoid bounds must be finite");
  }
  return kernels::trapezoid(
      [&](double x) { return std::exp(alpha * p.log_pdf(x) + (1.0 - alpha) * q.log_pdf(x)); }, lo, hi, n,
      kernels::Exec::Parallel);
}

}  // namespace oracle
}  // namespace ckit
