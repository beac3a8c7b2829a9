#ifndef SHUFGDA_PROBLEMS_QUADRATIC_HPP
#define SHUFGDA_PROBLEMS_QUADRATIC_HPP

// Synthetic nonconvex-strongly-concave quadratic game
//
//   f_i(x, y) = 1/2 x'Q_i x + x'A_i y - mu/2 |y|^2 + a_i'x + b_i'y
//
// with closed forms (bars denote sample means)
//
//   y*(x) = (A'x + b) / mu
//   Phi(x) = 1/2 x'H x + c'x + |b|^2 / (2 mu),  H = Q + A A'/mu,  c = a + A b/mu
//
// Joint smoothness bound under the sum-norm |dx| + |dy|:
//   l = max_i (|Q_i|_2 + |A_i|_2 + mu).

#include "shufgda/errors.hpp"
#include "shufgda/shuffle.hpp"
#include "shufgda/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace shufgda::problems {

namespace detail {

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

class QuadraticNCSC {
 public:
  QuadraticNCSC(std::vector<Matrix> Q, std::vector<Matrix> A, std::vector<Vector> a,
                std::vector<Vector> b, double mu)
      : Q_(std::move(Q)), A_(std::move(A)), a_(std::move(a)), b_(std::move(b)), mu_(mu) {
    const std::size_t n = Q_.size();
    if (n == 0) throw InvalidArgument("quadratic problem needs at least one sample");
    if (A_.size() != n || a_.size() != n || b_.size() != n)
      throw InvalidArgument("per-sample arrays have different lengths");
    if (!(mu_ > 0.0)) throw InvalidArgument("mu must be positive");
    dim_x_ = Q_[0].rows();
    dim_y_ = A_[0].cols();
    for (std::size_t i = 0; i < n; ++i) {
      if (Q_[i].rows() != dim_x_ || Q_[i].cols() != dim_x_ || A_[i].rows() != dim_x_ ||
          A_[i].cols() != dim_y_ || a_[i].size() != dim_x_ || b_[i].size() != dim_y_)
        throw InvalidArgument("inconsistent dimensions at sample " + std::to_string(i));
      const double asym = (Q_[i] - Q_[i].transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-12 * (1.0 + Q_[i].cwiseAbs().maxCoeff()))
        throw InvalidArgument("Q_" + std::to_string(i) + " is not symmetric");
    }

    Q_mean_ = Matrix::Zero(dim_x_, dim_x_);
    A_mean_ = Matrix::Zero(dim_x_, dim_y_);
    a_mean_ = Vector::Zero(dim_x_);
    b_mean_ = Vector::Zero(dim_y_);
    l_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Q_mean_ += Q_[i];
      A_mean_ += A_[i];
      a_mean_ += a_[i];
      b_mean_ += b_[i];
      l_ = std::max(l_, detail::spectral_norm(Q_[i]) + detail::spectral_norm(A_[i]) + mu_);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    Q_mean_ *= inv_n;
    A_mean_ *= inv_n;
    a_mean_ *= inv_n;
    b_mean_ *= inv_n;

    H_ = Q_mean_ + A_mean_ * A_mean_.transpose() / mu_;
    H_ = 0.5 * (H_ + H_.transpose());
    c_ = a_mean_ + A_mean_ * b_mean_ / mu_;
    phi_const_ = b_mean_.squaredNorm() / (2.0 * mu_);

    Eigen::LLT<Matrix> llt(H_);
    if (llt.info() == Eigen::Success) {
      x_star_ = -llt.solve(c_);
      phi_star_ = phi(*x_star_);
    }
  }

  Index num_samples() const noexcept { return static_cast<Index>(Q_.size()); }
  Index dim_x() const noexcept { return dim_x_; }
  Index dim_y() const noexcept { return dim_y_; }

  double value(const Vector& x, const Vector& y) const {
    return 0.5 * x.dot(Q_mean_ * x) + x.dot(A_mean_ * y) - 0.5 * mu_ * y.squaredNorm() +
           a_mean_.dot(x) + b_mean_.dot(y);
  }

  /// f_i itself, for finite-difference checks of the per-sample oracles.
  double value_i(Index i, const Vector& x, const Vector& y) const {
    const auto k = static_cast<std::size_t>(i);
    return 0.5 * x.dot(Q_[k] * x) + x.dot(A_[k] * y) - 0.5 * mu_ * y.squaredNorm() +
           a_[k].dot(x) + b_[k].dot(y);
  }

  void grad_x_i(Index i, const Vector& x, const Vector& y, Vector& out) const {
    const auto k = static_cast<std::size_t>(i);
    out.noalias() = Q_[k] * x;
    out.noalias() += A_[k] * y;
    out += a_[k];
  }

  void grad_y_i(Index i, const Vector& x, const Vector& y, Vector& out) const {
    const auto k = static_cast<std::size_t>(i);
    out.noalias() = A_[k].transpose() * x;
    out -= mu_ * y;
    out += b_[k];
  }

  Vector full_grad_x(const Vector& x, const Vector& y) const {
    return Q_mean_ * x + A_mean_ * y + a_mean_;
  }
  Vector full_grad_y(const Vector& x, const Vector& y) const {
    return A_mean_.transpose() * x - mu_ * y + b_mean_;
  }

  double smoothness() const noexcept { return l_; }
  double strong_concavity() const noexcept { return mu_; }
  /// -mu/2 |y|^2 is the only y-curvature.
  double dual_smoothness() const noexcept { return mu_; }

  Vector exact_dual_max(const Vector& x) const {
    return (A_mean_.transpose() * x + b_mean_) / mu_;
  }

  /// Phi(x) in closed form.
  double phi(const Vector& x) const { return 0.5 * x.dot(H_ * x) + c_.dot(x) + phi_const_; }
  Vector grad_phi(const Vector& x) const { return H_ * x + c_; }

  bool has_minimizer() const noexcept { return x_star_.has_value(); }
  double phi_star() const {
    if (!phi_star_) throw NumericFailure("H is not positive definite; Phi has no minimum");
    return *phi_star_;
  }
  const Vector& phi_minimizer() const {
    if (!x_star_) throw NumericFailure("H is not positive definite; Phi has no minimum");
    return *x_star_;
  }

  const Matrix& Q_mean() const noexcept { return Q_mean_; }
  const Matrix& A_mean() const noexcept { return A_mean_; }
  const Vector& a_mean() const noexcept { return a_mean_; }
  const Vector& b_mean() const noexcept { return b_mean_; }
  const Matrix& H() const noexcept { return H_; }
  const Vector& c() const noexcept { return c_; }
  const Matrix& Q(Index i) const { return Q_[static_cast<std::size_t>(i)]; }
  const Matrix& A(Index i) const { return A_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Matrix> Q_;
  std::vector<Matrix> A_;
  std::vector<Vector> a_;
  std::vector<Vector> b_;
  double mu_;
  Index dim_x_ = 0;
  Index dim_y_ = 0;
  double l_ = 0.0;

  Matrix Q_mean_, A_mean_, H_;
  Vector a_mean_, b_mean_, c_;
  double phi_const_ = 0.0;
  std::optional<Vector> x_star_;
  std::optional<double> phi_star_;
};

struct QuadraticPhi {
  double phi;
  Vector grad_phi;
  double phi_star;
};

/// Phi, its gradient and its minimum value in closed form.
inline QuadraticPhi quadratic_phi(const QuadraticNCSC& p, const Vector& x) {
  if (x.size() != p.dim_x()) throw InvalidArgument("dimension mismatch");
  return {p.phi(x), p.grad_phi(x), p.phi_star()};
}

/// Smallest eigenvalue accepted for H = Q + A A'/mu.
inline constexpr double kQuadraticMinCurvature = 0.1;

/// Seeded random instance with l/mu = target_kappa (mu = 1), mean Q
/// indefinite and H >= 0.1 I. Resamples with a shrinking negative curvature
/// until both hold.
inline QuadraticNCSC make_quadratic(Index dim_x, Index dim_y, Index n, double target_kappa,
                                    std::uint64_t seed, int max_attempts = 100) {
  if (dim_x < 1 || dim_y < 1 || n < 1) throw InvalidArgument("dimensions must be positive");
  if (!(target_kappa >= 1.0)) throw InvalidArgument("target_kappa must be >= 1");
  constexpr double mu = 1.0;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(attempt), RngStream::kProblem);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto gaussian = [&](Index r, Index c) {
      Matrix m(r, c);
      for (Index k = 0; k < m.size(); ++k) m.data()[k] = gauss(rng);
      return m;
    };

    // Mean curvature: one eigenvalue -nu, the rest in [-nu, 1].
    const double nu = std::pow(0.8, attempt);
    Eigen::HouseholderQR<Matrix> qx(gaussian(dim_x, dim_x));
    const Matrix Ux = qx.householderQ();
    Vector eig(dim_x);
    eig(0) = -nu;
    for (Index k = 1; k < dim_x; ++k) eig(k) = -nu + (1.0 + nu) * unif(rng);
    const Matrix Q0 = Ux * eig.asDiagonal() * Ux.transpose();

    // Mean coupling with singular values in [1, 2].
    const Matrix G = gaussian(dim_x, dim_y);
    Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector sv(svd.singularValues().size());
    for (Index k = 0; k < sv.size(); ++k) sv(k) = 1.0 + unif(rng);
    const Matrix A0 = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();

    // Zero-mean per-sample perturbations.
    std::vector<Matrix> E(static_cast<std::size_t>(n)), F(static_cast<std::size_t>(n));
    Matrix E_mean = Matrix::Zero(dim_x, dim_x), F_mean = Matrix::Zero(dim_x, dim_y);
    const double pert = 0.3 / std::sqrt(static_cast<double>(std::max(dim_x, dim_y)));
    for (Index i = 0; i < n; ++i) {
      Matrix e = gaussian(dim_x, dim_x);
      E[static_cast<std::size_t>(i)] = pert * 0.5 * (e + e.transpose());
      F[static_cast<std::size_t>(i)] = pert * gaussian(dim_x, dim_y);
      E_mean += E[static_cast<std::size_t>(i)];
      F_mean += F[static_cast<std::size_t>(i)];
    }
    E_mean /= static_cast<double>(n);
    F_mean /= static_cast<double>(n);

    std::vector<Matrix> Q(static_cast<std::size_t>(n)), A(static_cast<std::size_t>(n));
    std::vector<Vector> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Q[k] = Q0 + (E[k] - E_mean);
      Q[k] = 0.5 * (Q[k] + Q[k].transpose());
      A[k] = A0 + (F[k] - F_mean);
      a[k] = gaussian(dim_x, 1);
      b[k] = gaussian(dim_y, 1);
      worst = std::max(worst, detail::spectral_norm(Q[k]) + detail::spectral_norm(A[k]));
    }

    const double scale = worst > 0.0 ? (target_kappa - 1.0) * mu / worst : 0.0;
    for (Index i = 0; i < n; ++i) {
      Q[static_cast<std::size_t>(i)] *= scale;
      A[static_cast<std::size_t>(i)] *= scale;
    }

    QuadraticNCSC p(std::move(Q), std::move(A), std::move(a), std::move(b), mu);
    if (detail::min_eigenvalue(p.Q_mean()) < 0.0 &&
        detail::min_eigenvalue(p.H()) >= kQuadraticMinCurvature)
      return p;
  }
  throw ConstructionFailure("no quadratic instance with kappa = " + std::to_string(target_kappa) +
                            " satisfied the curvature invariants after " +
                            std::to_string(max_attempts) + " attempts");
}

}  // namespace shufgda::problems

#endif  // SHUFGDA_PROBLEMS_QUADRATIC_HPP
