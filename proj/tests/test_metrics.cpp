#include "shufgda/metrics/gradcheck.hpp"
#include "shufgda/metrics/simplex.hpp"
#include "shufgda/metrics/stationarity.hpp"
#include "shufgda/problems/dro_logistic.hpp"
#include "shufgda/problems/quadratic.hpp"
#include "shufgda/data.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shufgda;
using metrics::simplex_project;
using metrics::simplex_project_inplace;

namespace {

// Closest point of a regular grid on the simplex (spacing 1/m) to v.
Vector grid_argmin(const Vector& v, int m) {
  Vector best;
  double best_d = std::numeric_limits<double>::infinity();
  Vector y(v.size());
  if (v.size() == 2) {
    for (int a = 0; a <= m; ++a) {
      y << a / double(m), (m - a) / double(m);
      if (const double d = (y - v).squaredNorm(); d < best_d) best_d = d, best = y;
    }
  } else {
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) {
        y << a / double(m), b / double(m), (m - a - b) / double(m);
        if (const double d = (y - v).squaredNorm(); d < best_d) best_d = d, best = y;
      }
  }
  return best;
}

// Variational inequality: (v - y)^T (z - y) <= 0 at every vertex z.
double kkt_violation(const Vector& v, const Vector& y) {
  double worst = 0.0;
  for (Index k = 0; k < v.size(); ++k) {
    Vector z = Vector::Zero(v.size());
    z(k) = 1.0;
    worst = std::max(worst, (v - y).dot(z - y));
  }
  return std::max(worst, metrics::simplex_violation(y));
}

// f(x, y) = x y - y^2 / 2 with declared l = 10, so ascent with step 1/l
// contracts by 0.9 per iteration.
struct SlowDual {
  Index num_samples() const { return 1; }
  Index dim_x() const { return 1; }
  Index dim_y() const { return 1; }
  double value(const Vector& x, const Vector& y) const { return x(0) * y(0) - 0.5 * y(0) * y(0); }
  void grad_x_i(Index, const Vector&, const Vector& y, Vector& out) const { out = y; }
  void grad_y_i(Index, const Vector& x, const Vector& y, Vector& out) const { out = x - y; }
  double smoothness() const { return 10.0; }
  double strong_concavity() const { return 1.0; }
};

problems::DROLogistic small_dro(Index n, std::uint64_t seed) {
  return problems::DROLogistic(make_sparse_binary(n, 12, 4, seed));
}

}  // namespace

TEST(Simplex, MatchesGridSearchInLowDimension) {
  std::mt19937_64 rng(7);
  for (Index n : {2, 3}) {
    const int m = n == 2 ? 20000 : 600;
    for (int trial = 0; trial < 30; ++trial) {
      const Vector v = testutil::gaussian(n, rng, 2.0);
      const Vector y = simplex_project(v);
      EXPECT_LE((y - grid_argmin(v, m)).lpNorm<Eigen::Infinity>(), 2.0 / m) << v.transpose();
    }
  }
}

TEST(Simplex, SatisfiesOptimalityConditions) {
  std::mt19937_64 rng(8);
  for (Index n : {1, 2, 5, 40, 500}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector v = testutil::gaussian(n, rng, 3.0);
      EXPECT_LE(kkt_violation(v, simplex_project(v)), 1e-10);
    }
  }
}

TEST(Simplex, FixedPointScanAgreesWithSort) {
  std::mt19937_64 rng(9);
  for (Index n : {1, 3, 17, 1000}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector v = testutil::gaussian(n, rng, trial % 2 == 0 ? 0.01 : 10.0);
      const Vector ref = simplex_project(v);
      simplex_project_inplace(v);
      EXPECT_LE((v - ref).lpNorm<Eigen::Infinity>(), 1e-13);
    }
  }
}

TEST(Simplex, IdempotentOnSimplexPoints) {
  std::mt19937_64 rng(10);
  const Vector y = testutil::simplex_point(30, rng);
  EXPECT_LE((simplex_project(y) - y).norm(), 1e-14);
  Vector e = Vector::Zero(4);
  e(2) = 1.0;
  EXPECT_EQ(simplex_project(e), e);
}

TEST(Simplex, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(simplex_project(Vector()), InvalidArgument);
  Vector v = Vector::Ones(3);
  v(1) = std::nan("");
  EXPECT_THROW(simplex_project(v), NumericFailure);
  EXPECT_THROW(simplex_project_inplace(v), NumericFailure);
}

TEST(Stationarity, ExactPhiMatchesClosedForm) {
  const auto p = problems::make_quadratic(5, 4, 20, 8.0, 3);
  std::mt19937_64 rng(1);
  const Vector x = testutil::gaussian(5, rng);
  const auto est = metrics::estimate_phi(p, x);
  EXPECT_TRUE(est.exact);
  EXPECT_NEAR(est.phi, p.phi(x), 1e-10 * (1.0 + std::abs(p.phi(x))));
  EXPECT_LE((est.grad_phi - p.grad_phi(x)).norm(), 1e-9 * (1.0 + p.grad_phi(x).norm()));
}

TEST(Stationarity, IterativePhiConvergesToExact) {
  const auto p = problems::make_quadratic(4, 6, 10, 5.0, 4);
  std::mt19937_64 rng(2);
  const Vector x = testutil::gaussian(4, rng);
  const auto it = metrics::estimate_phi(p, x, 1e-10, 0, metrics::PhiMethod::Iterative);
  EXPECT_FALSE(it.exact);
  EXPECT_FALSE(it.inexact);
  EXPECT_NEAR(it.phi, p.phi(x), 1e-8);
}

TEST(Stationarity, DroIterativeAgreesWithExact) {
  const auto p = small_dro(60, 5);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    const Vector x = testutil::gaussian(p.dim_x(), rng, 0.5);
    const auto ex = metrics::estimate_phi(p, x, 1e-10, 0, metrics::PhiMethod::Exact);
    const auto it = metrics::estimate_phi(p, x, 1e-10, 0, metrics::PhiMethod::Iterative);
    EXPECT_NEAR(ex.phi, it.phi, 1e-6 * (1.0 + std::abs(ex.phi)));
    EXPECT_LE(problems::dro_exact_dual_max(p, x).kkt_residual, 1e-10);
  }
}

TEST(Stationarity, InexactFlagWhenBudgetRunsOut) {
  const SlowDual p;
  const Vector x = Vector::Ones(1);
  const auto est = metrics::estimate_phi(p, x, 1e-12, 2, metrics::PhiMethod::Iterative);
  EXPECT_TRUE(est.inexact);
  EXPECT_EQ(est.iterations, 2);
  EXPECT_NEAR(est.y_hat(0), 1.0 - 0.81, 1e-15);
  EXPECT_FALSE(metrics::estimate_phi(p, x, 1e-12).inexact);
}

TEST(Stationarity, DualResidualVanishesAtMaximiser) {
  const auto q = problems::make_quadratic(3, 3, 5, 4.0, 2);
  const Vector x = Vector::Ones(3);
  EXPECT_LE(metrics::dual_residual(q, x, q.exact_dual_max(x)), 1e-10);
  EXPECT_GT(metrics::dual_residual(q, x, Vector::Zero(3)), 1e-3);

  const auto d = small_dro(30, 2);
  const Vector xd = Vector::Constant(d.dim_x(), 0.1);
  EXPECT_LE(metrics::dual_residual(d, xd, d.exact_dual_max(xd)), 1e-9);
}

TEST(Stationarity, PotentialDecomposes) {
  const auto p = problems::make_quadratic(4, 3, 12, 6.0, 5);
  ASSERT_TRUE(p.has_minimizer());
  std::mt19937_64 rng(4);
  const Vector x = testutil::gaussian(4, rng), y = testutil::gaussian(3, rng);
  const auto v = metrics::potential(p, x, y, 4.0);
  ASSERT_TRUE(v.exact.has_value());
  EXPECT_NEAR(v.shifted, 5.0 * p.phi(x) - p.value(x, y), 1e-9);
  EXPECT_NEAR(*v.exact - v.shifted, -4.0 * p.phi_star(), 1e-9);
  EXPECT_GE(*v.exact, 0.0);
  EXPECT_THROW(metrics::potential(p, x, y, 0.0), InvalidArgument);
}

TEST(Stationarity, DeviationCheckStatuses) {
  const auto p = problems::make_quadratic(3, 3, 8, 4.0, 6);
  EpochState s;
  s.anchor_gx = Vector::Ones(3);
  s.anchor_gy = Vector::Ones(3);
  s.deviation_accum = 1e-6;
  const double l = p.smoothness();
  const double small = 0.1 / l;
  auto c = metrics::deviation_bound_check(p, s, small, small);
  EXPECT_TRUE(c.passed());
  EXPECT_NEAR(c.bound, 4.0 * 8.0 * (2.0 * small * small * 3.0), 1e-15);
  s.deviation_accum = 1.0;
  EXPECT_EQ(metrics::deviation_bound_check(p, s, small, small).status,
            metrics::DeviationCheck::Status::Fail);
  EXPECT_EQ(metrics::deviation_bound_check(p, s, 1.0 / l, small).status,
            metrics::DeviationCheck::Status::NotApplicable);
  s.deviation_accum = 0.0;
  EXPECT_TRUE(std::isinf(metrics::deviation_bound_check(p, s, small, small).slack));
}

TEST(Stationarity, GameGapProjectsOnlyConstrainedBlocks) {
  const auto q = problems::make_quadratic(3, 3, 5, 4.0, 7);
  std::mt19937_64 rng(5);
  const Vector x = testutil::gaussian(3, rng), y = testutil::gaussian(3, rng);
  const auto g = metrics::game_stationarity(q, x, y);
  EXPECT_NEAR(g.raw, g.projected, 1e-12);

  const auto d = small_dro(20, 3);
  const Vector xd = Vector::Constant(d.dim_x(), 0.2);
  Vector yd = Vector::Zero(20);
  yd(0) = 1.0;
  const auto gd = metrics::game_stationarity(d, xd, yd);
  EXPECT_LE(gd.projected, gd.raw + 1e-12);
}

TEST(Stationarity, ConstantEstimatesRespectSmoothness) {
  const auto q = problems::make_quadratic(4, 4, 10, 9.0, 8);
  const auto c = metrics::constant_estimates(q, 300, 1);
  EXPECT_NEAR(c.kappa, 9.0, 1e-9);
  EXPECT_GT(c.max_observed_ratio, 0.0);
  EXPECT_LE(c.max_observed_ratio, c.l * (1.0 + 1e-9));
  const auto cd = metrics::constant_estimates(small_dro(40, 1), 300, 2);
  EXPECT_LE(cd.max_observed_ratio, cd.l * (1.0 + 1e-9));
}

TEST(GradCheck, FiniteDifferencesMatchAnalyticGradients) {
  const auto q = problems::make_quadratic(5, 4, 6, 3.0, 9);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 5; ++k) {
    const Vector x = testutil::gaussian(5, rng), y = testutil::gaussian(4, rng);
    EXPECT_LE(metrics::sample_gradient_error(q, k, x, y).worst(), 1e-6);
    EXPECT_LE(metrics::full_gradient_error(q, x, y).worst(), 1e-6);
  }
}

TEST(GradCheck, RelativeErrorConventions) {
  EXPECT_EQ(metrics::relative_error(Vector::Zero(3), Vector::Zero(3)), 0.0);
  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  EXPECT_NEAR(metrics::relative_error(a, b), std::sqrt(2.0), 1e-15);
}
