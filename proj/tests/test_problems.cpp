#include "shufgda/data.hpp"
#include "shufgda/metrics/gradcheck.hpp"
#include "shufgda/metrics/stationarity.hpp"
#include "shufgda/problems/dro_logistic.hpp"
#include "shufgda/problems/poison_logistic.hpp"
#include "shufgda/problems/quadratic.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace shufgda;
using metrics::fd_gradient;
using metrics::relative_error;

namespace {

double min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

}  // namespace

// ---------------------------------------------------------------- quadratic

TEST(Quadratic, HitsTargetConditionNumber) {
  for (double kappa : {4.0, 10.0, 40.0}) {
    const auto p = problems::make_quadratic(10, 10, 50, kappa, 3);
    EXPECT_NEAR(p.smoothness() / p.strong_concavity(), kappa, 1e-9 * kappa);
  }
}

TEST(Quadratic, IsNonconvexInXButPhiIsStronglyConvex) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = problems::make_quadratic(10, 10, 50, 10.0, seed);
    EXPECT_LT(min_eig(p.Q_mean()), 0.0) << "seed " << seed;
    EXPECT_GE(min_eig(p.H()), problems::kQuadraticMinCurvature - 1e-9) << "seed " << seed;
    EXPECT_TRUE(p.has_minimizer());
  }
}

TEST(Quadratic, ClosedFormPhiMatchesInnerMaximisation) {
  const auto p = problems::make_quadratic(6, 5, 20, 10.0, 2);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vector x = testutil::gaussian(6, rng);
    const Vector y_star = p.exact_dual_max(x);
    EXPECT_NEAR(p.phi(x), p.value(x, y_star), 1e-10 * (1 + std::abs(p.phi(x))));
    EXPECT_LE(p.full_grad_y(x, y_star).norm(), 1e-10);
    const auto est = metrics::estimate_phi(p, x, 1e-11, 0, metrics::PhiMethod::Iterative);
    EXPECT_NEAR(est.phi, p.phi(x), 1e-8);
  }
}

TEST(Quadratic, MinimiserIsStationaryForPhi) {
  const auto p = problems::make_quadratic(8, 4, 30, 5.0, 4);
  EXPECT_LE(p.grad_phi(p.phi_minimizer()).norm(), 1e-10);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) EXPECT_GE(p.phi(testutil::gaussian(8, rng)), p.phi_star());
}

TEST(Quadratic, GradientsMatchFiniteDifferences) {
  const auto p = problems::make_quadratic(10, 10, 50, 10.0, 7);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testutil::gaussian(10, rng), y = testutil::gaussian(10, rng);
    EXPECT_LE(metrics::sample_gradient_error(p, trial % 50, x, y).worst(), 1e-5);
    EXPECT_LE(metrics::full_gradient_error(p, x, y).worst(), 1e-5);
    const Vector fd = fd_gradient([&](const Vector& v) { return p.phi(v); }, x);
    EXPECT_LE(relative_error(p.grad_phi(x), fd), 1e-5);
  }
}

TEST(Quadratic, SmoothnessBoundsObservedRatios) {
  const auto p = problems::make_quadratic(5, 5, 20, 8.0, 1);
  const auto c = metrics::constant_estimates(p, 200, 3);
  EXPECT_LE(c.max_observed_ratio, p.smoothness() * (1 + 1e-9));
}

TEST(Quadratic, RejectsBadInputs) {
  EXPECT_THROW(problems::make_quadratic(0, 3, 3, 2.0, 1), InvalidArgument);
  EXPECT_THROW(problems::make_quadratic(3, 3, 3, 0.5, 1), InvalidArgument);
  EXPECT_THROW(problems::QuadraticNCSC({Matrix::Identity(2, 2)}, {Matrix::Zero(2, 2)},
                                       {Vector::Zero(2)}, {Vector::Zero(2)}, -1.0),
               InvalidArgument);
  Matrix asym = Matrix::Zero(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(problems::QuadraticNCSC({asym}, {Matrix::Zero(2, 2)}, {Vector::Zero(2)},
                                       {Vector::Zero(2)}, 1.0),
               InvalidArgument);
}

TEST(Quadratic, InstanceIsSeedDeterministic) {
  const auto a = problems::make_quadratic(4, 4, 10, 5.0, 9);
  const auto b = problems::make_quadratic(4, 4, 10, 5.0, 9);
  const auto c = problems::make_quadratic(4, 4, 10, 5.0, 10);
  const Vector x = Vector::Ones(4);
  EXPECT_EQ(a.phi(x), b.phi(x));
  EXPECT_NE(a.phi(x), c.phi(x));
}

// ---------------------------------------------------------------------- DRO

TEST(Dro, SampleValuesAverageToObjective) {
  const problems::DROLogistic p(make_sparse_binary(40, 8, 3, 1));
  std::mt19937_64 rng(4);
  const Vector x = testutil::gaussian(8, rng), y = testutil::simplex_point(40, rng);
  double s = 0.0;
  for (Index i = 0; i < 40; ++i) s += p.value_i(i, x, y);
  EXPECT_NEAR(s / 40.0, p.value(x, y), 1e-12 * (1 + std::abs(p.value(x, y))));
}

TEST(Dro, GradientsMatchFiniteDifferences) {
  const problems::DROLogistic p(make_sparse_binary(60, 12, 4, 2));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testutil::gaussian(12, rng, 0.5), y = testutil::simplex_point(60, rng);
    EXPECT_LE(metrics::sample_gradient_error(p, (trial * 7) % 60, x, y).worst(), 1e-5);
    EXPECT_LE(metrics::full_gradient_error(p, x, y).worst(), 1e-5);
    EXPECT_LE(relative_error(p.full_grad_x(x, y), full_gradient(p, x, y).gx), 1e-12);
    EXPECT_LE(relative_error(p.full_grad_y(x, y), full_gradient(p, x, y).gy), 1e-12);
  }
}

TEST(Dro, PhiGradientMatchesFiniteDifferences) {
  const problems::DROLogistic p(make_sparse_binary(80, 10, 4, 3));
  std::mt19937_64 rng(6);
  auto phi = [&](const Vector& v) { return p.value(v, p.exact_dual_max(v)); };
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testutil::gaussian(10, rng, 0.5);
    const auto est = metrics::estimate_phi(p, x, 1e-12, 0, metrics::PhiMethod::Exact);
    EXPECT_LE(relative_error(est.grad_phi, fd_gradient(phi, x)), 1e-5);
  }
}

TEST(Dro, ExactDualMaxSatisfiesOptimality) {
  const problems::DROLogistic p(make_sparse_binary(100, 10, 4, 4));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = testutil::gaussian(10, rng, 2.0);
    const auto r = problems::dro_exact_dual_max(p, x);
    EXPECT_NEAR(r.y_star.sum(), 1.0, 1e-12);
    EXPECT_GE(r.y_star.minCoeff(), 0.0);
    EXPECT_LE(r.kkt_residual, 1e-10);
    EXPECT_LE(metrics::dual_residual(p, x, r.y_star), 1e-9);
  }
}

TEST(Dro, DefaultsFollowSampleCount) {
  const problems::DROLogistic p(make_sparse_binary(50, 5, 2, 5));
  EXPECT_DOUBLE_EQ(p.lambda1(), 1.0 / 2500.0);
  EXPECT_DOUBLE_EQ(p.strong_concavity(), 1.0);
  EXPECT_DOUBLE_EQ(p.lambda2(), 0.001);
  EXPECT_DOUBLE_EQ(p.alpha(), 10.0);
  EXPECT_EQ(p.dim_y(), 50);
  EXPECT_THROW(problems::DROLogistic(make_sparse_binary(5, 3, 2, 1), -1.0), InvalidArgument);
}

TEST(Dro, ProjectionKeepsIteratesFeasible) {
  const problems::DROLogistic p(make_sparse_binary(30, 5, 2, 6));
  Vector y = Vector::LinSpaced(30, -1.0, 2.0);
  p.project_y(y);
  EXPECT_NEAR(y.sum(), 1.0, 1e-12);
  EXPECT_GE(y.minCoeff(), 0.0);
}

// ---------------------------------------------------------------- poisoning

TEST(Poison, InstanceShapesFollowOptions) {
  const auto inst = problems::make_poisoning_instance(1);
  const auto& p = inst.problem;
  EXPECT_EQ(p.num_samples(), 700);
  EXPECT_EQ(p.test().n(), 300);
  EXPECT_EQ(p.dim_x(), 100);
  EXPECT_EQ(p.dim_y(), 100);
  EXPECT_EQ(p.poisoned().size(), 70u);
  EXPECT_EQ(inst.full.n(), 1000);
  EXPECT_DOUBLE_EQ(p.epsilon(), 2.0);
}

TEST(Poison, GradientsMatchFiniteDifferences) {
  problems::PoisonOptions opt;
  opt.n = 200;
  opt.d = 8;
  const auto p = problems::make_poisoning_instance(2, opt).problem;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector th = testutil::gaussian(8, rng), de = testutil::gaussian(8, rng, 0.5);
    const Index i = p.poisoned()[static_cast<std::size_t>(trial) % p.poisoned().size()];
    EXPECT_LE(metrics::sample_gradient_error(p, i, th, de).worst(), 1e-5);
    EXPECT_LE(metrics::sample_gradient_error(p, (i + 1) % p.num_samples(), th, de).x, 1e-5);
    EXPECT_LE(metrics::full_gradient_error(p, th, de).worst(), 1e-5);
  }
}

TEST(Poison, CleanSamplesIgnorePerturbation) {
  problems::PoisonOptions opt;
  opt.n = 50;
  opt.d = 4;
  const auto p = problems::make_poisoning_instance(3, opt).problem;
  Vector out(4);
  for (Index i = 0; i < p.num_samples(); ++i) {
    if (p.is_poisoned(i)) continue;
    p.grad_y_i(i, Vector::Ones(4), Vector::Ones(4), out);
    EXPECT_EQ(out, Vector::Zero(4));
    EXPECT_EQ(p.value_i(i, Vector::Ones(4), Vector::Ones(4)), p.value_i(i, Vector::Ones(4), Vector::Zero(4)));
  }
}

TEST(Poison, BoxProjectionAndCleanVariant) {
  const auto p = problems::make_poisoning_instance(4).problem;
  Vector d = Vector::LinSpaced(100, -5.0, 5.0);
  p.project_y(d);
  EXPECT_LE(d.cwiseAbs().maxCoeff(), 2.0);
  const auto clean = problems::without_poison(p);
  Vector z = Vector::Ones(100);
  clean.project_y(z);
  EXPECT_EQ(z, Vector::Zero(100));
}

TEST(Poison, BaseModelClassifiesTestSetWell) {
  const auto inst = problems::make_poisoning_instance(5);
  const double acc = problems::prediction_accuracy(inst.theta_star, inst.problem.test());
  EXPECT_GE(acc, 0.95);
  EXPECT_LE(acc, 1.0);
  EXPECT_NEAR(problems::prediction_accuracy(-inst.theta_star, inst.problem.test()), 1.0 - acc, 1e-12);
}

TEST(Poison, RejectsBadOptions) {
  problems::PoisonOptions opt;
  opt.poison_ratio = 1.5;
  EXPECT_THROW(problems::make_poisoning_instance(1, opt), InvalidArgument);
  opt.poison_ratio = 0.1;
  opt.n = 1;
  EXPECT_THROW(problems::make_poisoning_instance(1, opt), InvalidArgument);
}
