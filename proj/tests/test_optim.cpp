#include "shufgda/optim.hpp"
#include "shufgda/problems/dro_logistic.hpp"
#include "shufgda/problems/quadratic.hpp"
#include "shufgda/data.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shufgda;

namespace {

// Straight transcription of one variance-reduced epoch, written without any
// of the library's buffers or helpers.
template <typename P>
std::pair<Vector, Vector> reference_epoch(const P& p, const Vector& x0, const Vector& y0,
                                          const std::vector<Index>& order, double eta1,
                                          double eta2, bool gauss_seidel) {
  const Index n = p.num_samples();
  Vector h0 = Vector::Zero(p.dim_x()), d0 = Vector::Zero(p.dim_y());
  Vector tx(p.dim_x()), ty(p.dim_y());
  for (Index i = 0; i < n; ++i) {
    p.grad_x_i(i, x0, y0, tx);
    p.grad_y_i(i, x0, y0, ty);
    h0 += tx;
    d0 += ty;
  }
  h0 /= static_cast<double>(n);
  d0 /= static_cast<double>(n);
  Vector x = x0, y = y0;
  for (Index j = 0; j < n; ++j) {
    const Index i = order[static_cast<std::size_t>(j)];
    Vector a(p.dim_x()), b(p.dim_x());
    p.grad_x_i(i, x, y, a);
    p.grad_x_i(i, x0, y0, b);
    const Vector h = h0 + a - b;
    Vector xn = x - (eta1 / static_cast<double>(n)) * h;
    if constexpr (HasProjectX<P>) p.project_x(xn);
    Vector c(p.dim_y()), e(p.dim_y());
    p.grad_y_i(i, gauss_seidel ? xn : x, y, c);
    p.grad_y_i(i, x0, y0, e);
    const Vector d = d0 + c - e;
    y = y + (eta2 / static_cast<double>(n)) * d;
    if constexpr (HasProjectY<P>) p.project_y(y);
    x = xn;
  }
  return {x, y};
}

OptimizerConfig vr_config(double eta1, double eta2, Scheme s = Scheme::RR, std::uint64_t seed = 1) {
  OptimizerConfig cfg;
  cfg.eta1 = eta1;
  cfg.eta2 = eta2;
  cfg.scheme.variant = s;
  cfg.scheme.seed = seed;
  return cfg;
}

}  // namespace

TEST(VrEpoch, MatchesReferenceTranscription) {
  const auto p = problems::make_quadratic(6, 5, 17, 8.0, 4);
  std::mt19937_64 rng(5);
  for (bool gs : {false, true}) {
    const Vector x0 = testutil::gaussian(6, rng), y0 = testutil::gaussian(5, rng);
    auto cfg = vr_config(0.05, 0.2);
    cfg.coupling = gs ? Coupling::GaussSeidel : Coupling::Jacobi;
    const auto perm = permutation_for_epoch(cfg.scheme, 3, 17);
    const auto s = vr_shuffle_epoch(p, begin_epoch(p, x0, y0, 3, {}), perm, cfg);
    const auto [rx, ry] = reference_epoch(p, x0, y0, perm.order(), 0.05, 0.2, gs);
    EXPECT_LE((s.x - rx).norm(), 1e-12 * (1 + rx.norm())) << "gauss_seidel=" << gs;
    EXPECT_LE((s.y - ry).norm(), 1e-12 * (1 + ry.norm())) << "gauss_seidel=" << gs;
  }
}

TEST(VrEpoch, MatchesReferenceWithSimplexProjection) {
  const problems::DROLogistic p(make_sparse_binary(15, 6, 3, 2));
  std::mt19937_64 rng(6);
  const Vector x0 = testutil::gaussian(6, rng, 0.3), y0 = testutil::simplex_point(15, rng);
  const auto cfg = vr_config(0.1, 0.01);
  const auto perm = permutation_for_epoch(cfg.scheme, 0, 15);
  const auto s = vr_shuffle_epoch(p, begin_epoch(p, x0, y0, 0, {}), perm, cfg);
  const auto [rx, ry] = reference_epoch(p, x0, y0, perm.order(), 0.1, 0.01, false);
  EXPECT_LE((s.x - rx).norm(), 1e-12);
  EXPECT_LE((s.y - ry).norm(), 1e-12);
  EXPECT_NEAR(s.y.sum(), 1.0, 1e-12);
  EXPECT_GE(s.y.minCoeff(), 0.0);
}

TEST(VrEpoch, CachedAnchorsAreBitwiseIdentical) {
  const auto p = problems::make_quadratic(4, 4, 11, 5.0, 7);
  std::mt19937_64 rng(8);
  const Vector x0 = testutil::gaussian(4, rng), y0 = testutil::gaussian(4, rng);
  const auto cfg = vr_config(0.02, 0.1);
  const auto perm = permutation_for_epoch(cfg.scheme, 0, 11);
  AnchorCache cache(11, 4, 4);
  const auto a = vr_shuffle_epoch(p, begin_epoch(p, x0, y0, 0, {}), perm, cfg);
  const auto b = vr_shuffle_epoch(p, begin_epoch(p, x0, y0, 0, {}, &cache), perm, cfg, &cache);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.calls.joint(), 3 * 11);
  EXPECT_EQ(b.calls.joint(), 2 * 11);
}

TEST(VrEpoch, ZeroStepsKeepAnchorGradients) {
  const auto p = problems::make_quadratic(5, 3, 12, 6.0, 1);
  std::mt19937_64 rng(9);
  const auto s = begin_epoch(p, testutil::gaussian(5, rng), testutil::gaussian(3, rng), 0, {});
  double worst = 0.0;
  vr_shuffle_epoch(p, s, permutation_for_epoch({Scheme::RR, 3, std::nullopt}, 0, 12),
                   vr_config(0.0, 0.0), nullptr, [&](const InnerStep& st) {
                     worst = std::max(worst, (st.h - s.anchor_gx).cwiseAbs().maxCoeff() -
                                                 1e-15 * s.anchor_gx.norm());
                     worst = std::max(worst, (st.d - s.anchor_gy).cwiseAbs().maxCoeff() -
                                                 1e-15 * s.anchor_gy.norm());
                   });
  EXPECT_LE(worst, 1e-300);
}

TEST(VrEpoch, SingleSampleReducesToGda) {
  const auto p = problems::make_quadratic(4, 3, 1, 4.0, 2);
  Vector x = Vector::Ones(4), y = Vector::Zero(3), gx = x, gy = y;
  const auto cfg = vr_config(0.01, 0.2);
  for (int t = 0; t < 100; ++t) {
    const auto s = vr_shuffle_epoch(p, begin_epoch(p, x, y, t, {}), Permutation::identity(1), cfg);
    x = s.x;
    y = s.y;
    std::tie(gx, gy) = gda_step(p, gx, gy, cfg.eta1, cfg.eta2);
    ASSERT_EQ(x, gx) << "step " << t;
    ASSERT_EQ(y, gy) << "step " << t;
  }
}

TEST(VrEpoch, DeviationAccumulatesDistanceFromAnchor) {
  const auto p = problems::make_quadratic(3, 3, 5, 3.0, 3);
  const auto cfg = vr_config(0.05, 0.1);
  const Vector x0 = Vector::Ones(3), y0 = Vector::Zero(3);
  double manual = 0.0;
  Vector x = x0, y = y0;
  const auto perm = Permutation::identity(5);
  const auto s = vr_shuffle_epoch(p, begin_epoch(p, x0, y0, 0, {}), perm, cfg, nullptr,
                                  [&](const InnerStep& st) {
                                    manual += (x - x0).squaredNorm() + (y - y0).squaredNorm();
                                    x -= cfg.eta1 / 5.0 * st.h;
                                    y += cfg.eta2 / 5.0 * st.d;
                                  });
  EXPECT_NEAR(s.deviation_accum, manual, 1e-14);
  EXPECT_GT(manual, 0.0);
}

TEST(VrEpoch, RejectsWrongPermutationLength) {
  const auto p = problems::make_quadratic(2, 2, 4, 2.0, 1);
  const auto s = begin_epoch(p, Vector::Zero(2), Vector::Zero(2), 0, {});
  EXPECT_THROW(vr_shuffle_epoch(p, s, Permutation::identity(3), vr_config(0.1, 0.1)),
               InvalidArgument);
}

TEST(Theorem1Steps, FollowTheStatedRule) {
  const double l = 20.0, mu = 2.0;
  const auto s = theorem1_step_sizes(l, mu);
  EXPECT_DOUBLE_EQ(s.eta2, 1.0 / 160.0);
  EXPECT_DOUBLE_EQ(s.r, 14.0 * 100.0);
  EXPECT_DOUBLE_EQ(s.eta1, s.eta2 / s.r);
  EXPECT_DOUBLE_EQ(s.lambda, 4.0);
  EXPECT_TRUE(check_theorem1_conditions(l, mu, s.eta1, s.eta2).all());
  const auto half = theorem1_step_sizes(l, mu, 0.5, 2.0);
  EXPECT_DOUBLE_EQ(half.eta2, 0.5 / 160.0);
  EXPECT_DOUBLE_EQ(half.r, 2.0 * 1400.0);
}

TEST(Theorem1Steps, ConditionsDetectEachViolation) {
  const auto c = check_theorem1_conditions(10.0, 1.0, 0.01, 0.5);
  EXPECT_FALSE(c.eta2_bound);
  EXPECT_FALSE(c.ratio_bound);
  EXPECT_FALSE(c.sum_of_squares);
  EXPECT_THROW(theorem1_step_sizes(1.0, 2.0), InvalidArgument);
  EXPECT_THROW(theorem1_step_sizes(2.0, 1.0, 1.5), InvalidArgument);
  EXPECT_THROW(theorem1_step_sizes(2.0, 1.0, 1.0, 0.5), InvalidArgument);
}

TEST(Config, EnforceTheoryRejectsLargeSteps) {
  const auto p = problems::make_quadratic(2, 2, 3, 2.0, 1);
  auto cfg = vr_config(0.5, 0.5);
  EXPECT_FALSE(validate_config(p, cfg).empty());
  cfg.enforce_theory = true;
  EXPECT_THROW(validate_config(p, cfg), InvalidArgument);
  cfg.eta1 = -1.0;
  EXPECT_THROW(validate_config(p, cfg), InvalidArgument);
}

TEST(AlgorithmId, RoundTrips) {
  for (const char* id : {"vr-ig", "vr-so", "vr-rr", "vr-rr+cache", "sgda", "gda"}) {
    OptimizerConfig c;
    apply_algorithm_id(id, c);
    EXPECT_EQ(algorithm_id(c), id);
  }
  OptimizerConfig c;
  EXPECT_THROW(apply_algorithm_id("adam", c), InvalidArgument);
  EXPECT_THROW(apply_algorithm_id("sgda+cache", c), InvalidArgument);
}

TEST(Sgda, EstimateIsUnbiasedAndVarianceShrinksWithBatch) {
  const auto p = problems::make_quadratic(3, 3, 20, 4.0, 6);
  std::mt19937_64 rng(10);
  const Vector x = testutil::gaussian(3, rng), y = testutil::gaussian(3, rng);
  const auto full = full_gradient(p, x, y);
  auto probe = [&](Index b) {
    UniformSampler s(make_rng(77, static_cast<std::uint64_t>(b), RngStream::kSgdaSampling));
    OracleCounter calls;
    constexpr int kTrials = 20000;
    Vector mean = Vector::Zero(3);
    double var = 0.0;
    for (int k = 0; k < kTrials; ++k) {
      const auto [gx, gy] = sgda_gradient_estimate(p, x, y, b, s, calls);
      mean += gx;
      var += (gx - full.gx).squaredNorm();
    }
    EXPECT_EQ(calls.joint(), kTrials * b);
    return std::make_pair(Vector(mean / kTrials), var / kTrials);
  };
  const auto [m1, v1] = probe(1);
  const auto [m4, v4] = probe(4);
  EXPECT_LE((m1 - full.gx).norm(), 0.05 * std::sqrt(v1) + 1e-12);
  EXPECT_LE((m4 - full.gx).norm(), 0.05 * std::sqrt(v4) + 1e-12);
  EXPECT_NEAR(v1 / v4, 4.0, 0.4);
}

TEST(Sgda, EpochConsumesCeilNOverBTimesB) {
  const auto p = problems::make_quadratic(2, 2, 10, 3.0, 1);
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::Sgda;
  cfg.eta1 = 0.01;
  cfg.eta2 = 0.01;
  cfg.batch_size = 3;
  auto s = sgda_sampler(cfg, 0);
  OracleCounter calls;
  sgda_epoch(p, Vector::Zero(2), Vector::Zero(2), cfg, s, calls);
  EXPECT_EQ(calls.joint(), 12);
  cfg.batch_size = 11;
  EXPECT_THROW(sgda_epoch(p, Vector::Zero(2), Vector::Zero(2), cfg, s, calls), InvalidArgument);
}

TEST(Run, EmitsRowsWithOracleAccounting) {
  const auto p = problems::make_quadratic(3, 3, 8, 3.0, 2);
  struct Case {
    const char* id;
    bool cache;
    std::int64_t per_epoch;
  };
  for (const Case c : {Case{"vr-rr", false, 24}, Case{"vr-ig+cache", true, 16}, Case{"gda", false, 8},
                       Case{"sgda", false, 8}}) {
    OptimizerConfig cfg;
    apply_algorithm_id(c.id, cfg);
    cfg.cache_anchors = c.cache;
    cfg.eta1 = 0.01;
    cfg.eta2 = 0.05;
    cfg.epochs = 6;
    const auto r = run(p, cfg, Vector::Zero(3), Vector::Zero(3));
    ASSERT_EQ(r.records.size(), 8u) << c.id;
    for (std::size_t t = 0; t < r.records.size(); ++t) {
      EXPECT_EQ(r.records[t].epoch, static_cast<std::int64_t>(t));
      EXPECT_EQ(r.records[t].oracle_calls, static_cast<std::int64_t>(t) * c.per_epoch) << c.id;
      EXPECT_EQ(r.records[t].algorithm, c.id);
    }
  }
}

TEST(Run, IsDeterministicForFixedSeed) {
  const auto p = problems::make_quadratic(4, 4, 9, 3.0, 2);
  for (const char* id : {"vr-rr", "vr-so", "sgda"}) {
    OptimizerConfig cfg;
    apply_algorithm_id(id, cfg);
    cfg.eta1 = 0.01;
    cfg.eta2 = 0.05;
    cfg.epochs = 5;
    cfg.seed = 3;
    Vector xa, xb;
    RunHooks ha, hb;
    ha.at_iterate.push_back([&](const IterateContext& c, TrajectoryRecord&) { xa = c.x; });
    hb.at_iterate.push_back([&](const IterateContext& c, TrajectoryRecord&) { xb = c.x; });
    run(p, cfg, Vector::Ones(4), Vector::Zero(4), ha);
    run(p, cfg, Vector::Ones(4), Vector::Zero(4), hb);
    EXPECT_EQ(xa, xb) << id;
  }
}

TEST(Run, DivergenceAbortsWithPartialRows) {
  const auto p = problems::make_quadratic(3, 3, 5, 3.0, 2);
  OptimizerConfig cfg;
  cfg.eta1 = 60.0;
  cfg.eta2 = 60.0;
  cfg.epochs = 50;
  try {
    run(p, cfg, Vector::Ones(3), Vector::Zero(3));
    FAIL() << "expected RunAborted";
  } catch (const RunAborted& e) {
    EXPECT_FALSE(e.partial().records.empty());
    EXPECT_TRUE(e.where().epoch.has_value());
  }
}

TEST(Run, HooksFillColumnsAndEpochDiagnostics) {
  const auto p = problems::make_quadratic(3, 3, 6, 3.0, 2);
  OptimizerConfig cfg;
  cfg.eta1 = 0.01;
  cfg.eta2 = 0.05;
  cfg.epochs = 2;
  RunHooks hooks;
  hooks.at_iterate.push_back(
      [&](const IterateContext& c, TrajectoryRecord& r) { r.set(Column::phi, p.phi(c.x)); });
  hooks.after_epoch.push_back([](const EpochContext& c, TrajectoryRecord& r) {
    r.set(Column::B_t, c.state.deviation_accum);
  });
  const auto r = run(p, cfg, Vector::Ones(3), Vector::Zero(3), hooks);
  ASSERT_EQ(r.records.size(), 4u);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.get(Column::phi).has_value());
  for (std::size_t t = 0; t + 1 < r.records.size(); ++t)
    EXPECT_TRUE(r.records[t].get(Column::B_t).has_value());
  EXPECT_FALSE(r.records.back().get(Column::B_t).has_value());
}

TEST(Run, CacheFallsBackWhenTooLarge) {
  const auto p = problems::make_quadratic(3, 3, 6, 3.0, 2);
  OptimizerConfig cfg;
  cfg.cache_anchors = true;
  cfg.eta1 = 0.01;
  cfg.eta2 = 0.05;
  cfg.epochs = 1;
  RunOptions opt;
  opt.max_cache_bytes = 8;
  const auto r = run(p, cfg, Vector::Zero(3), Vector::Zero(3), {}, opt);
  EXPECT_EQ(r.records.back().oracle_calls, 2 * 18);
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("cache") != std::string::npos;
  EXPECT_TRUE(warned);
}
