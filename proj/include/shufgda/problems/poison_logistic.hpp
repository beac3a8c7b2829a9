#ifndef SHUFGDA_PROBLEMS_POISON_LOGISTIC_HPP
#define SHUFGDA_PROBLEMS_POISON_LOGISTIC_HPP

// Data poisoning against logistic regression.
//
// The attacker picks a perturbation delta with |delta|_inf <= eps added to the
// poisoned part D1 of the training set; the learner fits theta on the union:
//
//   max_delta min_theta  F(delta, theta; D1) + F(0, theta; D2)
//   F(delta, theta; D) = mean over D of CE(t_i, sigma((z_i + delta)'theta))
//
// In the library's min-max convention theta is the primal (x) block and delta
// the dual (y) block. The game is not strongly concave in delta (CE is convex
// in it), so strong_concavity() is nominal and only game stationarity is a
// meaningful progress measure.

#include "shufgda/data.hpp"
#include "shufgda/errors.hpp"
#include "shufgda/problems/logistic_math.hpp"
#include "shufgda/shuffle.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace shufgda::problems {

struct PoisonOptions {
  Index n = 1000;
  Index d = 100;
  double train_fraction = 0.7;
  double poison_ratio = 0.1;
  double epsilon = 2.0;
  /// Variance of the logit noise nu_i.
  double noise_variance = 1e-3;
  bool label_noise = true;
  /// Radius on |theta| over which smoothness() is a valid bound.
  double theta_radius = 10.0;
};

class PoisonLogistic {
 public:
  /// `train` rows listed in `poisoned` form D1, the rest D2.
  PoisonLogistic(DatasetMatrix train, DatasetMatrix test, std::vector<Index> poisoned,
                 double epsilon, double theta_radius = 10.0)
      : train_(std::move(train)),
        test_(std::move(test)),
        poisoned_idx_(std::move(poisoned)),
        epsilon_(epsilon),
        theta_radius_(theta_radius) {
    train_.validate();
    test_.validate();
    if (train_.n() < 1) throw InvalidArgument("empty training set");
    if (test_.n() > 0 && test_.d() != train_.d())
      throw InvalidArgument("train/test dimension mismatch");
    if (!(epsilon_ >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
    is_poisoned_.assign(static_cast<std::size_t>(train_.n()), false);
    for (Index i : poisoned_idx_) {
      if (i < 0 || i >= train_.n() || is_poisoned_[static_cast<std::size_t>(i)])
        throw InvalidArgument("poisoned index set is invalid");
      is_poisoned_[static_cast<std::size_t>(i)] = true;
    }
    const double n = static_cast<double>(train_.n());
    const double n1 = static_cast<double>(poisoned_idx_.size());
    const double n2 = n - n1;
    weight_poisoned_ = n1 > 0 ? n / n1 : 0.0;
    weight_clean_ = n2 > 0 ? n / n2 : 0.0;
    targets_ = train_.labels01();

    const double shift = epsilon_ * std::sqrt(static_cast<double>(train_.d()));
    l_ = 0.0;
    for (Index i = 0; i < train_.n(); ++i) {
      const double z = train_.features.row(i).norm();
      const double li = is_poisoned_[static_cast<std::size_t>(i)]
                            ? weight_poisoned_ *
                                  (0.25 * ((z + shift) * (z + shift) + theta_radius_ * theta_radius_) + 1.0)
                            : weight_clean_ * 0.25 * z * z;
      l_ = std::max(l_, li);
    }
  }

  Index num_samples() const noexcept { return train_.n(); }
  Index dim_x() const noexcept { return train_.d(); }
  Index dim_y() const noexcept { return train_.d(); }

  const DatasetMatrix& train() const noexcept { return train_; }
  const DatasetMatrix& test() const noexcept { return test_; }
  const std::vector<Index>& poisoned() const noexcept { return poisoned_idx_; }
  bool is_poisoned(Index i) const { return is_poisoned_[static_cast<std::size_t>(i)]; }
  double epsilon() const noexcept { return epsilon_; }

  /// Per-sample f_i = w_i CE_i, w = n/|D1| on D1 and n/|D2| on D2.
  double value_i(Index i, const Vector& theta, const Vector& delta) const {
    const double u = margin(i, theta, delta);
    return weight(i) * (softplus(u) - targets_(i) * u);
  }

  double value(const Vector& theta, const Vector& delta) const {
    double s = 0.0;
    for (Index i = 0; i < train_.n(); ++i) s += value_i(i, theta, delta);
    return s / static_cast<double>(train_.n());
  }

  void grad_x_i(Index i, const Vector& theta, const Vector& delta, Vector& out) const {
    const double r = weight(i) * (sigmoid(margin(i, theta, delta)) - targets_(i));
    out = r * train_.features.row(i).transpose();
    if (is_poisoned(i)) out += r * delta;
  }

  void grad_y_i(Index i, const Vector& theta, const Vector& delta, Vector& out) const {
    if (!is_poisoned(i)) {
      out.setZero(train_.d());
      return;
    }
    out = (weight(i) * (sigmoid(margin(i, theta, delta)) - targets_(i))) * theta;
  }

  void project_y(Vector& delta) const { delta = delta.cwiseMax(-epsilon_).cwiseMin(epsilon_); }

  /// Bound on the joint Hessian for |theta| <= theta_radius.
  double smoothness() const noexcept { return l_; }
  /// Nominal: the game is not strongly concave in delta.
  double strong_concavity() const noexcept { return l_; }

 private:
  double margin(Index i, const Vector& theta, const Vector& delta) const {
    double u = train_.features.row(i).dot(theta);
    if (is_poisoned(i)) u += delta.dot(theta);
    return u;
  }
  double weight(Index i) const { return is_poisoned(i) ? weight_poisoned_ : weight_clean_; }

  DatasetMatrix train_;
  DatasetMatrix test_;
  std::vector<Index> poisoned_idx_;
  std::vector<bool> is_poisoned_;
  Vector targets_;
  double epsilon_;
  double theta_radius_;
  double weight_poisoned_ = 0.0;
  double weight_clean_ = 0.0;
  double l_ = 0.0;
};

/// Fraction of rows with 1{sigma(z'theta) > 0.5} equal to the {0,1} label.
inline double prediction_accuracy(const Vector& theta, const DatasetMatrix& data) {
  if (data.n() == 0) throw InvalidArgument("accuracy of an empty dataset");
  if (theta.size() != data.d()) throw InvalidArgument("dimension mismatch");
  const Vector margins = data.features * theta;
  Index correct = 0;
  for (Index i = 0; i < data.n(); ++i) {
    const bool predicted = sigmoid(margins(i)) > 0.5;
    if (predicted == (data.labels(i) > 0.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

struct PoisonInstance {
  PoisonLogistic problem;
  DatasetMatrix full;  // all n samples with the train/test split
  Vector theta_star;
};

/// Gaussian features z ~ N(0, I_d), base model theta* ~ N(0, I_d), labels
/// t = 1{sigma(z'theta* + nu) > 0.5} with nu ~ N(0, noise_variance). Random
/// train/test split; a poison_ratio share of the training rows is D1.
inline PoisonInstance make_poisoning_instance(std::uint64_t seed, const PoisonOptions& opt = {}) {
  if (opt.n < 2 || opt.d < 1) throw InvalidArgument("poisoning instance needs n >= 2, d >= 1");
  if (!(opt.poison_ratio >= 0.0 && opt.poison_ratio <= 1.0))
    throw InvalidArgument("poison ratio must lie in [0, 1]");
  auto rng = make_rng(seed, 0, RngStream::kProblem);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, std::sqrt(opt.noise_variance));

  DatasetMatrix full;
  full.features.resize(opt.n, opt.d);
  for (Index k = 0; k < full.features.size(); ++k) full.features.data()[k] = gauss(rng);
  Vector theta_star(opt.d);
  for (Index j = 0; j < opt.d; ++j) theta_star(j) = gauss(rng);
  full.labels.resize(opt.n);
  for (Index i = 0; i < opt.n; ++i) {
    const double nu = opt.label_noise ? noise(rng) : 0.0;
    full.labels(i) = sigmoid(full.features.row(i).dot(theta_star) + nu) > 0.5 ? 1.0 : -1.0;
  }

  full = train_test_split(full, opt.train_fraction, seed);
  DatasetMatrix train = full.train_rows();
  DatasetMatrix test = full.test_rows();

  auto prng = make_rng(seed, 1, RngStream::kProblem);
  const Permutation perm = Permutation::random(train.n(), prng);
  const auto n_poison = static_cast<Index>(
      std::llround(opt.poison_ratio * static_cast<double>(train.n())));
  std::vector<Index> poisoned(perm.order().begin(), perm.order().begin() + n_poison);

  PoisonLogistic problem(std::move(train), std::move(test), std::move(poisoned), opt.epsilon,
                         opt.theta_radius);
  return {std::move(problem), std::move(full), std::move(theta_star)};
}

/// The same training problem with the perturbation pinned at zero.
inline PoisonLogistic without_poison(const PoisonLogistic& p) {
  return PoisonLogistic(p.train(), p.test(), p.poisoned(), 0.0);
}

}  // namespace shufgda::problems

#endif  // SHUFGDA_PROBLEMS_POISON_LOGISTIC_HPP
