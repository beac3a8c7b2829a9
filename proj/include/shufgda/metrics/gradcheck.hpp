#ifndef SHUFGDA_METRICS_GRADCHECK_HPP
#define SHUFGDA_METRICS_GRADCHECK_HPP

// Central finite-difference checks of analytic gradients.

#include "shufgda/oracle.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace shufgda::metrics {

template <typename P>
concept HasSampleValue = requires(const P& p, Index i, const Vector& x, const Vector& y) {
  { p.value_i(i, x, y) } -> std::convertible_to<double>;
};

/// Central differences with per-coordinate step h * max(1, |v_k|).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& v,
                          double h = 1e-5) {
  Vector g(v.size());
  Vector w = v;
  for (Index k = 0; k < v.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(v(k)));
    w(k) = v(k) + step;
    const double up = f(w);
    w(k) = v(k) - step;
    const double down = f(w);
    w(k) = v(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

/// |a - b| / max(|a|, |b|), with 0 when both vanish.
inline double relative_error(const Vector& analytic, const Vector& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

struct GradientError {
  double x = 0.0;
  double y = 0.0;
  double worst() const { return std::max(x, y); }
};

/// Per-sample oracle i against differences of f_i.
template <MinimaxProblem P>
  requires HasSampleValue<P>
GradientError sample_gradient_error(const P& p, Index i, const Vector& x, const Vector& y,
                                    double h = 1e-5) {
  Vector gx(p.dim_x()), gy(p.dim_y());
  p.grad_x_i(i, x, y, gx);
  p.grad_y_i(i, x, y, gy);
  const Vector fx = fd_gradient([&](const Vector& v) { return p.value_i(i, v, y); }, x, h);
  const Vector fy = fd_gradient([&](const Vector& v) { return p.value_i(i, x, v); }, y, h);
  return {relative_error(gx, fx), relative_error(gy, fy)};
}

/// Averaged oracle against differences of f.
template <MinimaxProblem P>
GradientError full_gradient_error(const P& p, const Vector& x, const Vector& y, double h = 1e-5) {
  const FullGradientPair g = full_gradient(p, x, y);
  const Vector fx = fd_gradient([&](const Vector& v) { return p.value(v, y); }, x, h);
  const Vector fy = fd_gradient([&](const Vector& v) { return p.value(x, v); }, y, h);
  return {relative_error(g.gx, fx), relative_error(g.gy, fy)};
}

}  // namespace shufgda::metrics

#endif  // SHUFGDA_METRICS_GRADCHECK_HPP
