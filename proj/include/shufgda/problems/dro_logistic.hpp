#ifndef SHUFGDA_PROBLEMS_DRO_LOGISTIC_HPP
#define SHUFGDA_PROBLEMS_DRO_LOGISTIC_HPP

// Distributionally robust logistic regression with a nonconvex regulariser:
//
//   min_x max_{y in simplex} sum_i y_i l_i(x) - V(y) + g(x)
//   l_i(x) = log(1 + exp(-t_i z_i'x))
//   V(y)   = lambda1/2 |n y - 1|^2
//   g(x)   = lambda2 sum_j alpha x_j^2 / (1 + alpha x_j^2)
//
// Finite-sum split: f_i(x, y) = n y_i l_i(x) - V(y) + g(x). The dual is
// n-dimensional and every dual update is projected onto the simplex.

#include "shufgda/data.hpp"
#include "shufgda/errors.hpp"
#include "shufgda/metrics/simplex.hpp"
#include "shufgda/problems/logistic_math.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shufgda::problems {

class DROLogistic {
 public:
  /// lambda1 defaults to 1/n^2 (then mu = lambda1 n^2 = 1).
  explicit DROLogistic(DatasetMatrix data, double lambda1 = std::numeric_limits<double>::quiet_NaN(),
                       double lambda2 = 0.001, double alpha = 10.0)
      : data_(std::move(data)), lambda2_(lambda2), alpha_(alpha) {
    data_.validate();
    if (data_.n() < 1 || data_.d() < 1) throw InvalidArgument("DRO needs a non-empty dataset");
    const double n = static_cast<double>(data_.n());
    lambda1_ = std::isnan(lambda1) ? 1.0 / (n * n) : lambda1;
    if (!(lambda1_ > 0.0) || !(lambda2_ >= 0.0) || !(alpha_ >= 0.0))
      throw InvalidArgument("DRO parameters must be non-negative (lambda1 positive)");
    max_row_norm_ = data_.features.rowwise().norm().maxCoeff();
  }

  Index num_samples() const noexcept { return data_.n(); }
  Index dim_x() const noexcept { return data_.d(); }
  Index dim_y() const noexcept { return data_.n(); }

  double lambda1() const noexcept { return lambda1_; }
  double lambda2() const noexcept { return lambda2_; }
  double alpha() const noexcept { return alpha_; }
  const DatasetMatrix& data() const noexcept { return data_; }

  double loss_i(Index i, const Vector& x) const {
    return softplus(-data_.labels(i) * data_.features.row(i).dot(x));
  }

  Vector losses(const Vector& x) const {
    Vector margins = data_.features * x;
    Vector l(data_.n());
    for (Index i = 0; i < data_.n(); ++i) l(i) = softplus(-data_.labels(i) * margins(i));
    return l;
  }

  double regularizer(const Vector& x) const {
    const auto ax2 = alpha_ * x.array().square();
    return lambda2_ * (ax2 / (1.0 + ax2)).sum();
  }

  Vector regularizer_grad(const Vector& x) const {
    const auto ax2 = alpha_ * x.array().square();
    return (2.0 * lambda2_ * alpha_ * x.array() / (1.0 + ax2).square()).matrix();
  }

  double divergence(const Vector& y) const {
    const double n = static_cast<double>(data_.n());
    return 0.5 * lambda1_ * (n * y.array() - 1.0).matrix().squaredNorm();
  }

  double value(const Vector& x, const Vector& y) const {
    return y.dot(losses(x)) - divergence(y) + regularizer(x);
  }

  /// f_i = n y_i loss_i(x) - divergence(y) + regularizer(x); averages to value().
  double value_i(Index i, const Vector& x, const Vector& y) const {
    const double n = static_cast<double>(data_.n());
    return n * y(i) * loss_i(i, x) - divergence(y) + regularizer(x);
  }

  void grad_x_i(Index i, const Vector& x, const Vector& y, Vector& out) const {
    const double n = static_cast<double>(data_.n());
    const double t = data_.labels(i);
    const double m = t * data_.features.row(i).dot(x);
    out = regularizer_grad(x);
    out.noalias() += (n * y(i) * -t * sigmoid(-m)) * data_.features.row(i).transpose();
  }

  void grad_y_i(Index i, const Vector& x, const Vector& y, Vector& out) const {
    const double n = static_cast<double>(data_.n());
    out = (-lambda1_ * n) * (n * y.array() - 1.0).matrix();
    out(i) += n * loss_i(i, x);
  }

  /// Averaged gradients in O(nd), bypassing the per-sample loop.
  Vector full_grad_x(const Vector& x, const Vector& y) const {
    const Vector margins = data_.features * x;
    Vector w(data_.n());
    for (Index i = 0; i < data_.n(); ++i) {
      const double t = data_.labels(i);
      w(i) = y(i) * -t * sigmoid(-t * margins(i));
    }
    Vector g = regularizer_grad(x);
    g.noalias() += data_.features.transpose() * w;
    return g;
  }

  Vector full_grad_y(const Vector& x, const Vector& y) const {
    const double n = static_cast<double>(data_.n());
    return losses(x) - (lambda1_ * n) * (n * y.array() - 1.0).matrix();
  }

  void project_y(Vector& y) const { metrics::simplex_project_inplace(y); }

  /// Argmax over the simplex: projection of l(x)/(lambda1 n^2) + 1/n.
  Vector exact_dual_max(const Vector& x) const {
    const double n = static_cast<double>(data_.n());
    Vector c = losses(x) / (lambda1_ * n * n);
    c.array() += 1.0 / n;
    return metrics::simplex_project(c);
  }

  /// Bound valid for y on the simplex (y_i <= 1):
  ///   n |z|^2/4 + 2 alpha lambda2  (x-block)  +  n |z|  (coupling)  +  lambda1 n^2 (y-block).
  double smoothness() const noexcept {
    const double n = static_cast<double>(data_.n());
    const double z = max_row_norm_;
    return 0.25 * n * z * z + 2.0 * alpha_ * lambda2_ + n * z + lambda1_ * n * n;
  }
  double strong_concavity() const noexcept {
    const double n = static_cast<double>(data_.n());
    return lambda1_ * n * n;
  }
  double dual_smoothness() const noexcept { return strong_concavity(); }

 private:
  DatasetMatrix data_;
  double lambda1_;
  double lambda2_;
  double alpha_;
  double max_row_norm_ = 0.0;
};

struct DualMaxResult {
  Vector y_star;
  /// Spread of the reduced gradient over the support of y*; zero at optimality.
  double kkt_residual;
};

/// Closed-form inner maximiser with its first-order optimality residual:
/// on {i : y*_i > 0} the dual gradient must be constant.
inline DualMaxResult dro_exact_dual_max(const DROLogistic& p, const Vector& x) {
  DualMaxResult r{p.exact_dual_max(x), 0.0};
  const double n = static_cast<double>(p.num_samples());
  const Vector g = p.losses(x) - p.lambda1() * n * (n * r.y_star.array() - 1.0).matrix();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < g.size(); ++i)
    if (r.y_star(i) > 0.0) {
      lo = std::min(lo, g(i));
      hi = std::max(hi, g(i));
    }
  r.kkt_residual = hi >= lo ? hi - lo : 0.0;
  if (!r.y_star.allFinite()) throw NumericFailure("non-finite dual maximiser");
  return r;
}

}  // namespace shufgda::problems

#endif  // SHUFGDA_PROBLEMS_DRO_LOGISTIC_HPP
