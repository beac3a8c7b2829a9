#ifndef SHUFGDA_HARNESS_SELFTEST_HPP
#define SHUFGDA_HARNESS_SELFTEST_HPP

// Fast invariant checks per module, run by `shufgda selftest`. Each check is
// small enough that the whole suite finishes in a few seconds.

#include "shufgda/data.hpp"
#include "shufgda/harness/config.hpp"
#include "shufgda/harness/csv.hpp"
#include "shufgda/harness/svg.hpp"
#include "shufgda/metrics/gradcheck.hpp"
#include "shufgda/metrics/simplex.hpp"
#include "shufgda/metrics/stationarity.hpp"
#include "shufgda/optim.hpp"
#include "shufgda/problems/dro_logistic.hpp"
#include "shufgda/problems/poison_logistic.hpp"
#include "shufgda/problems/quadratic.hpp"
#include "shufgda/shuffle.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace shufgda::harness {

struct SelfTestCase {
  std::string module;
  std::string name;
  /// Empty on success, otherwise a description of the violation.
  std::function<std::string()> check;
};

struct SelfTestOutcome {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest_detail {

inline Vector gaussian(Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(d);
  for (Index k = 0; k < d; ++k) v(k) = g(rng);
  return v;
}

inline std::string fail_if(bool bad, const std::string& msg) { return bad ? msg : std::string(); }

}  // namespace selftest_detail

inline std::vector<SelfTestCase> selftest_cases() {
  using namespace selftest_detail;
  std::vector<SelfTestCase> cases;

  cases.push_back({"oracle", "full gradient is the per-sample mean and costs n calls", [] {
    const auto p = problems::make_quadratic(4, 3, 7, 5.0, 11);
    std::mt19937_64 rng(1);
    const Vector x = gaussian(4, rng), y = gaussian(3, rng);
    const auto g = full_gradient(p, x, y);
    Vector sx = Vector::Zero(4), sy = Vector::Zero(3), t4(4), t3(3);
    for (Index i = 0; i < 7; ++i) {
      p.grad_x_i(i, x, y, t4);
      p.grad_y_i(i, x, y, t3);
      sx += t4;
      sy += t3;
    }
    if (g.oracle_calls != 7) return std::string("oracle count != n");
    return fail_if((g.gx - sx / 7.0).norm() > 1e-12 || (g.gy - sy / 7.0).norm() > 1e-12,
                   "full gradient differs from per-sample mean");
  }});

  cases.push_back({"oracle", "anchor cache reproduces per-sample gradients", [] {
    const auto p = problems::make_quadratic(3, 2, 5, 4.0, 3);
    const Vector x = Vector::Ones(3), y = Vector::Ones(2);
    const AnchorCache cache = per_sample_gradient_cache(p, x, y);
    Vector gx(3), gy(2);
    for (Index i = 0; i < 5; ++i) {
      p.grad_x_i(i, x, y, gx);
      p.grad_y_i(i, x, y, gy);
      if (gx != Vector(cache.gx(i)) || gy != Vector(cache.gy(i))) return std::string("cache mismatch");
    }
    return std::string();
  }});

  cases.push_back({"shuffle", "schemes produce valid, reproducible orders", [] {
    for (auto scheme : {Scheme::IG, Scheme::SO, Scheme::RR}) {
      ShufflingScheme s{scheme, 42, std::nullopt};
      const auto a0 = permutation_for_epoch(s, 0, 31), a1 = permutation_for_epoch(s, 1, 31);
      Permutation check(a0.order());  // validates bijectivity
      (void)check;
      if (a0 != permutation_for_epoch(s, 0, 31)) return std::string("not reproducible");
      if (scheme != Scheme::RR && a0 != a1) return std::string("order changed between epochs");
      if (scheme == Scheme::RR && a0 == a1) return std::string("RR reused an order");
      if (scheme == Scheme::IG && a0 != Permutation::identity(31))
        return std::string("IG is not the data order");
    }
    return std::string();
  }});

  cases.push_back({"optim", "zero steps keep the corrected gradient at the anchor", [] {
    const auto p = problems::make_quadratic(5, 4, 9, 6.0, 5);
    std::mt19937_64 rng(2);
    OptimizerConfig cfg;
    cfg.eta1 = 0.0;
    cfg.eta2 = 0.0;
    auto s = begin_epoch(p, gaussian(5, rng), gaussian(4, rng), 0, {});
    const Vector h0 = s.anchor_gx, d0 = s.anchor_gy;
    double worst = 0.0;
    vr_shuffle_epoch(p, s, Permutation::identity(9), cfg, nullptr, [&](const InnerStep& st) {
      worst = std::max({worst, (st.h - h0).cwiseAbs().maxCoeff() / (h0.norm() + 1e-300),
                        (st.d - d0).cwiseAbs().maxCoeff() / (d0.norm() + 1e-300)});
    });
    return fail_if(worst > 1e-15, "h or d drifted from the anchor gradient");
  }});

  cases.push_back({"optim", "single sample epoch equals a GDA step bitwise", [] {
    const auto p = problems::make_quadratic(3, 3, 1, 3.0, 9);
    OptimizerConfig cfg;
    cfg.eta1 = 0.01;
    cfg.eta2 = 0.1;
    Vector x = Vector::Ones(3), y = Vector::Zero(3), gx = x, gy = y;
    for (int t = 0; t < 100; ++t) {
      auto s = vr_shuffle_epoch(p, begin_epoch(p, x, y, t, {}), Permutation::identity(1), cfg);
      x = s.x;
      y = s.y;
      std::tie(gx, gy) = gda_step(p, gx, gy, cfg.eta1, cfg.eta2);
      if (x != gx || y != gy) return "diverged from GDA at step " + std::to_string(t);
    }
    return std::string();
  }});

  cases.push_back({"optim", "run emits T+2 rows with increasing oracle counts", [] {
    const auto p = problems::make_quadratic(3, 3, 6, 3.0, 4);
    for (std::string algo : {"vr-rr", "vr-so+cache", "sgda", "gda"}) {
      OptimizerConfig cfg;
      apply_algorithm_id(algo, cfg);
      cfg.epochs = 4;
      cfg.eta1 = 0.01;
      cfg.eta2 = 0.05;
      const auto r = run(p, cfg, Vector::Zero(3), Vector::Zero(3));
      if (r.records.size() != 6) return algo + ": wrong row count";
      for (std::size_t k = 1; k < r.records.size(); ++k)
        if (r.records[k].oracle_calls <= r.records[k - 1].oracle_calls ||
            r.records[k].epoch != static_cast<std::int64_t>(k))
          return algo + ": bad epoch or oracle accounting";
    }
    return std::string();
  }});

  cases.push_back({"problems", "analytic gradients match finite differences", [] {
    std::mt19937_64 rng(3);
    const auto q = problems::make_quadratic(4, 3, 5, 5.0, 2);
    const problems::DROLogistic dro(make_sparse_binary(12, 6, 3, 4));
    problems::PoisonOptions po;
    po.n = 40;
    po.d = 5;
    const auto poison = problems::make_poisoning_instance(5, po).problem;
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const Vector xq = gaussian(4, rng), yq = gaussian(3, rng);
      worst = std::max(worst, metrics::sample_gradient_error(q, trial, xq, yq).worst());
      worst = std::max(worst, metrics::full_gradient_error(q, xq, yq).worst());
      Vector yd = gaussian(12, rng).cwiseAbs();
      yd /= yd.sum();
      const Vector xd = gaussian(6, rng, 0.5);
      worst = std::max(worst, metrics::sample_gradient_error(dro, trial, xd, yd).worst());
      worst = std::max(worst, metrics::full_gradient_error(dro, xd, yd).worst());
      const Vector th = gaussian(5, rng), de = gaussian(5, rng, 0.5);
      worst = std::max(worst, metrics::sample_gradient_error(poison, trial, th, de).worst());
      worst = std::max(worst, metrics::full_gradient_error(poison, th, de).worst());
    }
    return fail_if(worst > 1e-5, "relative gradient error " + format_double(worst));
  }});

  cases.push_back({"data", "libsvm parsing and located errors", [] {
    std::istringstream ok("+1 1:0.5 3:2\n-1 2:1\n\n0 4:-1.5\n");
    const auto ds = parse_libsvm(ok);
    if (ds.n() != 3 || ds.d() != 4 || ds.labels(2) != -1.0 || ds.features(0, 2) != 2.0)
      return std::string("sample parsed to the wrong matrix");
    std::istringstream bad("+1 1:0.5\n-1 3:1 2:4\n");
    try {
      parse_libsvm(bad);
    } catch (const ParseError& e) {
      return fail_if(e.line() != 2, "error reported on the wrong line");
    }
    return std::string("decreasing index accepted");
  }});

  cases.push_back({"metrics", "simplex projection is feasible and stationary", [] {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector v = gaussian(1 + trial % 7, rng, 2.0);
      const Vector p = metrics::simplex_project(v);
      Vector q = v;
      metrics::simplex_project_inplace(q);
      if (metrics::simplex_violation(p) > 1e-12) return std::string("projection infeasible");
      if ((p - q).cwiseAbs().maxCoeff() > 1e-12) return std::string("projection methods disagree");
      // Optimality: v - p is constant on the support and not larger off it.
      double tau = 0.0;
      for (Index k = 0; k < p.size(); ++k)
        if (p(k) > 0) tau = v(k) - p(k);
      for (Index k = 0; k < p.size(); ++k) {
        if (p(k) > 0 && std::abs(v(k) - p(k) - tau) > 1e-10) return std::string("KKT violated");
        if (p(k) == 0 && v(k) > tau + 1e-10) return std::string("KKT violated");
      }
    }
    return std::string();
  }});

  cases.push_back({"metrics", "exact and iterative primal values agree", [] {
    const auto q = problems::make_quadratic(4, 5, 6, 8.0, 7);
    const problems::DROLogistic dro(make_sparse_binary(30, 5, 3, 8));
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 3; ++trial) {
      const Vector xq = gaussian(4, rng), xd = gaussian(5, rng);
      const double a = metrics::estimate_phi(q, xq, 1e-10, 0, metrics::PhiMethod::Exact).phi;
      const double b = metrics::estimate_phi(q, xq, 1e-10, 0, metrics::PhiMethod::Iterative).phi;
      const double c = metrics::estimate_phi(dro, xd, 1e-10, 0, metrics::PhiMethod::Exact).phi;
      const double d = metrics::estimate_phi(dro, xd, 1e-10, 0, metrics::PhiMethod::Iterative).phi;
      if (std::abs(a - b) > 1e-6 || std::abs(c - d) > 1e-6)
        return std::string("exact and iterative Phi differ");
    }
    return std::string();
  }});

  cases.push_back({"harness", "config and CSV round-trip exactly", [] {
    ExperimentConfig c;
    c.problem = "dro-logistic";
    c.algorithms = {"vr-rr", "sgda"};
    c.eta1 = 0.1 / 3.0;
    c.seeds = {1, 2, 9};
    c.budget = 12345;
    if (parse_config(to_text(c)) != c) return std::string("config round-trip lost information");
    const auto p = problems::make_quadratic(3, 3, 5, 3.0, 1);
    OptimizerConfig cfg;
    cfg.epochs = 3;
    RunHooks hooks;
    hooks.at_iterate.push_back([&p](const IterateContext& ctx, TrajectoryRecord& r) {
      r.set(Column::phi, p.phi(ctx.x) / 3.0);
    });
    const auto recs = run(p, cfg, Vector::Ones(3), Vector::Zero(3), hooks).records;
    const std::string text = to_csv(recs);
    std::istringstream in(text);
    const auto back = read_csv(in);
    if (back.size() != recs.size()) return std::string("CSV row count changed");
    for (std::size_t k = 0; k < recs.size(); ++k)
      if (back[k].values != recs[k].values || back[k].oracle_calls != recs[k].oracle_calls)
        return std::string("CSV round-trip changed a value");
    return fail_if(to_csv(back) != text, "CSV re-serialisation differs");
  }});

  cases.push_back({"harness", "SVG output is deterministic", [] {
    const std::vector<Series> s = {{"a", {0, 1, 2}, {1, 0.1, 0.01}}, {"b", {0, 1, 2}, {2, 0, 0.5}}};
    PlotStyle style;
    style.log_y = true;
    const std::string a = render_svg(s, style), b = render_svg(s, style);
    if (a != b) return std::string("two renders differ");
    return fail_if(a.find("class=\"warning\"") == std::string::npos, "clamp warning missing");
  }});

  return cases;
}

/// Runs every case; exceptions count as failures.
inline std::vector<SelfTestOutcome> run_selftests() {
  std::vector<SelfTestOutcome> out;
  for (const auto& c : selftest_cases()) {
    SelfTestOutcome o{c.module, c.name, false, {}};
    try {
      o.detail = c.check();
      o.passed = o.detail.empty();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_SELFTEST_HPP
