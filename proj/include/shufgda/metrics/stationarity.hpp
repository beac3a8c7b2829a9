#ifndef SHUFGDA_METRICS_STATIONARITY_HPP
#define SHUFGDA_METRICS_STATIONARITY_HPP

// Quantities tracked along a run:
//   Phi(x) = max_y f(x, y) and grad Phi(x) = grad_x f(x, y*(x))
//   potential P_lambda(x, y) = lambda (Phi(x) - Phi*) + Phi(x) - f(x, y)
//     and its Phi*-free shift (lambda + 1) Phi(x) - f(x, y)
//   per-epoch deviation bound B_t <= 4n (eta1^2 |grad_x f|^2 + eta2^2 |grad_y f|^2)
//   game stationarity |grad f(x, y)|

#include "shufgda/errors.hpp"
#include "shufgda/oracle.hpp"
#include "shufgda/optim.hpp"
#include "shufgda/shuffle.hpp"
#include "shufgda/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>

namespace shufgda::metrics {

/// Problems that can produce averaged gradients faster than n per-sample calls.
template <typename P>
concept HasFastFullGradient = requires(const P& p, const Vector& x, const Vector& y) {
  { p.full_grad_x(x, y) } -> std::convertible_to<Vector>;
  { p.full_grad_y(x, y) } -> std::convertible_to<Vector>;
};

/// Uncounted full gradient for diagnostics.
template <MinimaxProblem P>
FullGradientPair gradient(const P& p, const Vector& x, const Vector& y) {
  if constexpr (HasFastFullGradient<P>) {
    detail::check_dims(p, x, y);
    return {p.full_grad_x(x, y), p.full_grad_y(x, y), 0};
  } else {
    return full_gradient(p, x, y);
  }
}

template <MinimaxProblem P>
Vector gradient_y(const P& p, const Vector& x, const Vector& y) {
  if constexpr (HasFastFullGradient<P>)
    return p.full_grad_y(x, y);
  else
    return full_gradient(p, x, y).gy;
}

/// Stationarity of y for max_y f(x, .): |grad_y f| when unconstrained, else the
/// scaled fixed-point residual l_y |y - P(y + grad_y f / l_y)|.
template <MinimaxProblem P>
double dual_residual(const P& p, const Vector& x, const Vector& y) {
  const Vector g = gradient_y(p, x, y);
  if constexpr (HasProjectY<P>) {
    const double ly = dual_smoothness(p);
    Vector v = y + g / ly;
    p.project_y(v);
    return ly * (y - v).norm();
  } else {
    return g.norm();
  }
}

enum class PhiMethod { Auto, Exact, Iterative };

struct PhiEstimate {
  double phi = 0.0;
  Vector grad_phi;
  Vector y_hat;
  double residual = 0.0;
  bool exact = false;
  /// Iteration budget ran out with residual > tol.
  bool inexact = false;
  std::int64_t iterations = 0;
};

inline constexpr double kDefaultInnerTol = 1e-8;

/// ceil(10 kappa_y log(1/tol)), kappa_y = l_y / mu.
template <MinimaxProblem P>
std::int64_t default_inner_iterations(const P& p, double tol) {
  const double kappa_y = dual_smoothness(p) / p.strong_concavity();
  return static_cast<std::int64_t>(std::ceil(10.0 * std::max(1.0, kappa_y) * std::log(1.0 / tol)));
}

/// Phi(x) and grad Phi(x). Uses the closed-form maximiser when the problem has
/// one (PhiMethod::Auto), otherwise projected gradient ascent on f(x, .) with
/// step 1/l_y from `y_start` (zero, projected, when empty).
template <MinimaxProblem P>
PhiEstimate estimate_phi(const P& p, const Vector& x, double tol = kDefaultInnerTol,
                         std::int64_t max_iters = 0, PhiMethod method = PhiMethod::Auto,
                         const std::optional<Vector>& y_start = std::nullopt) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (x.size() != p.dim_x()) throw InvalidArgument("dimension mismatch");
  PhiEstimate est;

  bool use_exact = false;
  if constexpr (HasExactDualMax<P>) use_exact = method != PhiMethod::Iterative;
  if (method == PhiMethod::Exact && !use_exact)
    throw InvalidArgument("problem has no closed-form dual maximiser");

  if (use_exact) {
    if constexpr (HasExactDualMax<P>) est.y_hat = p.exact_dual_max(x);
    est.exact = true;
    est.residual = dual_residual(p, x, est.y_hat);
  } else {
    if (max_iters <= 0) max_iters = default_inner_iterations(p, tol);
    const double ly = dual_smoothness(p);
    Vector y = y_start ? *y_start : Vector::Zero(p.dim_y());
    project_y(p, y);
    est.residual = dual_residual(p, x, y);
    while (est.residual > tol && est.iterations < max_iters) {
      y += gradient_y(p, x, y) / ly;
      project_y(p, y);
      ++est.iterations;
      est.residual = dual_residual(p, x, y);
    }
    est.inexact = est.residual > tol;
    est.y_hat = std::move(y);
  }
  est.phi = p.value(x, est.y_hat);
  est.grad_phi = gradient(p, x, est.y_hat).gx;
  if (!std::isfinite(est.phi) || !est.grad_phi.allFinite())
    throw NumericFailure("non-finite Phi estimate");
  return est;
}

struct PotentialValue {
  double shifted = 0.0;
  /// lambda (Phi - Phi*) + Phi - f, when Phi* is known.
  std::optional<double> exact;
  double phi = 0.0;
  bool inexact = false;
};

/// (lambda + 1) Phi(x) - f(x, y); the exact potential too when Phi* is known.
template <MinimaxProblem P>
PotentialValue potential(const P& p, const Vector& x, const Vector& y, double lambda,
                         double tol = kDefaultInnerTol) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const PhiEstimate est = estimate_phi(p, x, tol);
  PotentialValue v;
  v.phi = est.phi;
  v.inexact = est.inexact;
  const double f = p.value(x, y);
  v.shifted = (lambda + 1.0) * est.phi - f;
  if constexpr (HasPhiStar<P>) {
    const double exact = lambda * (est.phi - p.phi_star()) + est.phi - f;
    // both gaps are non-negative; allow rounding only
    if (exact < -1e-9 * (1.0 + std::abs(est.phi) + std::abs(f)))
      throw InternalError("potential below zero: " + std::to_string(exact));
    v.exact = exact;
  }
  if (!std::isfinite(v.shifted)) throw NumericFailure("non-finite potential");
  return v;
}

/// Shorthand returning only the shifted potential.
template <MinimaxProblem P>
double potential_shifted(const P& p, const Vector& x, const Vector& y, double lambda,
                         double tol = kDefaultInnerTol) {
  return potential(p, x, y, lambda, tol).shifted;
}

struct DeviationCheck {
  enum class Status { Pass, Fail, NotApplicable };
  Status status = Status::NotApplicable;
  double deviation = 0.0;
  double bound = 0.0;
  /// bound / deviation; +inf when the deviation is zero.
  double slack = 0.0;

  bool passed() const noexcept { return status == Status::Pass; }
};

/// B_t <= 4n (eta1^2 |h0|^2 + eta2^2 |d0|^2) for a finished epoch, provided
/// eta1^2 + eta2^2 <= 1/(4 l^2); otherwise NotApplicable.
template <MinimaxProblem P>
DeviationCheck deviation_bound_check(const P& p, const EpochState& epoch, double eta1,
                                     double eta2) {
  const double l = p.smoothness();
  DeviationCheck c;
  c.deviation = epoch.deviation_accum;
  const double n = static_cast<double>(p.num_samples());
  c.bound = 4.0 * n *
            (eta1 * eta1 * epoch.anchor_gx.squaredNorm() + eta2 * eta2 * epoch.anchor_gy.squaredNorm());
  c.slack = c.deviation > 0.0 ? c.bound / c.deviation : std::numeric_limits<double>::infinity();
  if (eta1 * eta1 + eta2 * eta2 > 1.0 / (4.0 * l * l)) {
    c.status = DeviationCheck::Status::NotApplicable;
    return c;
  }
  c.status = c.deviation <= c.bound ? DeviationCheck::Status::Pass : DeviationCheck::Status::Fail;
  return c;
}

struct GameGap {
  /// |(grad_x f, grad_y f)|.
  double raw = 0.0;
  /// |(x - P_X(x - grad_x f), y - P_Y(y + grad_y f))|; equals raw when unconstrained.
  double projected = 0.0;
};

template <MinimaxProblem P>
GameGap game_stationarity(const P& p, const Vector& x, const Vector& y) {
  const FullGradientPair g = gradient(p, x, y);
  GameGap gap;
  gap.raw = std::sqrt(g.gx.squaredNorm() + g.gy.squaredNorm());
  Vector px = x - g.gx;
  Vector py = y + g.gy;
  project_x(p, px);
  project_y(p, py);
  gap.projected = std::sqrt((x - px).squaredNorm() + (y - py).squaredNorm());
  return gap;
}

struct Constants {
  double l = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  /// Largest observed |grad f_i(z1) - grad f_i(z2)| / (|dx| + |dy|).
  double max_observed_ratio = 0.0;
};

/// Analytic constants plus a random-pair probe of the smoothness bound. Probe
/// points are N(0, scale^2) per coordinate with the dual projected.
template <MinimaxProblem P>
Constants constant_estimates(const P& p, int probes = 200, std::uint64_t seed = 0,
                             double scale = 1.0) {
  Constants c;
  c.l = p.smoothness();
  c.mu = p.strong_concavity();
  c.kappa = c.l / c.mu;
  if (!(c.kappa >= 1.0)) throw InternalError("condition number below 1");

  auto rng = make_rng(seed, 0, RngStream::kInit);
  std::normal_distribution<double> gauss(0.0, scale);
  std::uniform_int_distribution<Index> pick(0, p.num_samples() - 1);
  auto draw = [&](Index dim) {
    Vector v(dim);
    for (Index k = 0; k < dim; ++k) v(k) = gauss(rng);
    return v;
  };
  Vector g1x(p.dim_x()), g2x(p.dim_x()), g1y(p.dim_y()), g2y(p.dim_y());
  for (int k = 0; k < probes; ++k) {
    Vector x1 = draw(p.dim_x()), x2 = draw(p.dim_x());
    Vector y1 = draw(p.dim_y()), y2 = draw(p.dim_y());
    project_x(p, x1);
    project_x(p, x2);
    project_y(p, y1);
    project_y(p, y2);
    const Index i = pick(rng);
    p.grad_x_i(i, x1, y1, g1x);
    p.grad_x_i(i, x2, y2, g2x);
    p.grad_y_i(i, x1, y1, g1y);
    p.grad_y_i(i, x2, y2, g2y);
    const double num = std::sqrt((g1x - g2x).squaredNorm() + (g1y - g2y).squaredNorm());
    const double den = (x1 - x2).norm() + (y1 - y2).norm();
    if (den <= 0.0) continue;
    const double ratio = num / den;
    c.max_observed_ratio = std::max(c.max_observed_ratio, ratio);
    if (ratio > c.l * (1.0 + 1e-9))
      throw InternalError("smoothness bound violated at sample " + std::to_string(i) +
                          ": observed " + std::to_string(ratio) + " > l = " + std::to_string(c.l));
  }
  return c;
}

struct StationarityReport {
  double grad_phi_norm = 0.0;
  double grad_f_norm = 0.0;
  double phi = 0.0;
  double potential_shifted = 0.0;
  double lambda = 0.0;
  double inner_solver_residual = 0.0;
};

template <MinimaxProblem P>
StationarityReport stationarity_report(const P& p, const Vector& x, const Vector& y,
                                       double lambda = 4.0, double tol = kDefaultInnerTol) {
  const PhiEstimate est = estimate_phi(p, x, tol);
  StationarityReport r;
  r.phi = est.phi;
  r.grad_phi_norm = est.grad_phi.norm();
  r.grad_f_norm = game_stationarity(p, x, y).raw;
  r.lambda = lambda;
  r.potential_shifted = (lambda + 1.0) * est.phi - p.value(x, y);
  r.inner_solver_residual = est.residual;
  return r;
}

}  // namespace shufgda::metrics

#endif  // SHUFGDA_METRICS_STATIONARITY_HPP
