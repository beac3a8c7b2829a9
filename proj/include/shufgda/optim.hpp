#ifndef SHUFGDA_OPTIM_HPP
#define SHUFGDA_OPTIM_HPP

// Shuffling gradient descent-ascent with variance reduction, plus the two
// baselines it is compared against (deterministic two-timescale GDA and
// with-replacement minibatch SGDA).
//
// One epoch of the variance-reduced method, for a permutation pi of [n]:
//
//   h0 = grad_x f(x_t, y_t),  d0 = grad_y f(x_t, y_t)
//   for j = 0..n-1, i = pi[j]:
//     h_j     = h0 + grad_x f_i(x_j, y_j) - grad_x f_i(x_t, y_t)
//     d_j     = d0 + grad_y f_i(x_j, y_j) - grad_y f_i(x_t, y_t)
//     x_{j+1} = P_X(x_j - (eta1 / n) h_j)
//     y_{j+1} = P_Y(y_j + (eta2 / n) d_j)
//
// Both corrections are evaluated at the pre-update (x_j, y_j) by default
// (Jacobi). Coupling::GaussSeidel evaluates the dual correction at x_{j+1}.

#include "shufgda/errors.hpp"
#include "shufgda/oracle.hpp"
#include "shufgda/shuffle.hpp"
#include "shufgda/trajectory.hpp"
#include "shufgda/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shufgda {

enum class Algorithm { VrShuffle, Sgda, Gda };
enum class Coupling { Jacobi, GaussSeidel };

/// Iterates beyond this norm abort the run instead of producing NaN rows.
inline constexpr double kDivergenceNorm = 1e12;

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::VrShuffle;
  ShufflingScheme scheme{};
  double eta1 = 1e-3;
  double eta2 = 1e-2;
  /// T; run() executes epochs t = 0..T.
  std::int64_t epochs = 0;
  Index batch_size = 1;
  std::uint64_t seed = 0;
  bool cache_anchors = false;
  bool enforce_theory = false;
  Coupling coupling = Coupling::Jacobi;
};

/// Short identifier used in CSV files and on the command line.
inline std::string algorithm_id(const OptimizerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::VrShuffle:
      return "vr-" + std::string(to_string(cfg.scheme.variant)) + (cfg.cache_anchors ? "+cache" : "");
    case Algorithm::Sgda: return "sgda";
    case Algorithm::Gda: return "gda";
  }
  return "?";
}

/// Parses "vr-ig" | "vr-so" | "vr-rr" | "sgda" | "gda" into `cfg`. A "+cache"
/// suffix on the shuffling variants turns on anchor caching.
inline void apply_algorithm_id(std::string_view id, OptimizerConfig& cfg) {
  constexpr std::string_view kCache = "+cache";
  const bool cached = id.ends_with(kCache);
  if (cached) id.remove_suffix(kCache.size());
  if (cached && id.substr(0, 3) != "vr-")
    throw InvalidArgument("'+cache' applies only to the vr-* algorithms");
  cfg.cache_anchors = cached;
  if (id == "sgda") {
    cfg.algorithm = Algorithm::Sgda;
  } else if (id == "gda") {
    cfg.algorithm = Algorithm::Gda;
  } else if (id.substr(0, 3) == "vr-") {
    cfg.algorithm = Algorithm::VrShuffle;
    cfg.scheme.variant = scheme_from_string(id.substr(3));
  } else {
    throw InvalidArgument("unknown algorithm '" + std::string(id) + "'");
  }
}

// ---------------------------------------------------------------------------
// Step sizes
// ---------------------------------------------------------------------------

struct StepSizes {
  double eta1;
  double eta2;
  double lambda;
  double r;
};

/// Which of the step-size premises of the convergence theorem hold.
struct TheoremConditions {
  bool eta2_bound = false;      // eta2 <= 1/(8l)
  bool ratio_bound = false;     // eta2 / eta1 >= 14 kappa^2
  bool sum_of_squares = false;  // eta1^2 + eta2^2 <= 1/(4 l^2)

  bool all() const noexcept { return eta2_bound && ratio_bound && sum_of_squares; }
};

inline TheoremConditions check_theorem1_conditions(double l, double mu, double eta1,
                                                   double eta2) {
  constexpr double rel = 1e-12;
  const double kappa = l / mu;
  TheoremConditions c;
  c.eta2_bound = eta2 <= (1.0 / (8.0 * l)) * (1.0 + rel);
  c.ratio_bound = eta2 >= 14.0 * kappa * kappa * eta1 * (1.0 - rel);
  c.sum_of_squares = eta1 * eta1 + eta2 * eta2 <= (1.0 / (4.0 * l * l)) * (1.0 + rel);
  return c;
}

/// eta2 = fraction/(8l), r = multiplier * 14 kappa^2, eta1 = eta2/r, lambda = 4.
inline StepSizes theorem1_step_sizes(double l, double mu, double eta2_fraction = 1.0,
                                     double r_multiplier = 1.0) {
  if (!(mu > 0.0) || !(l > 0.0)) throw InvalidArgument("l and mu must be positive");
  if (l < mu) throw InvalidArgument("l < mu gives a condition number below 1");
  if (!(eta2_fraction > 0.0 && eta2_fraction <= 1.0))
    throw InvalidArgument("eta2_fraction must lie in (0, 1]");
  if (!(r_multiplier >= 1.0)) throw InvalidArgument("r_multiplier must be >= 1");

  const double kappa = l / mu;
  StepSizes s{};
  s.eta2 = eta2_fraction / (8.0 * l);
  s.r = r_multiplier * 14.0 * kappa * kappa;
  s.eta1 = s.eta2 / s.r;
  s.lambda = 4.0;
  if (!check_theorem1_conditions(l, mu, s.eta1, s.eta2).all())
    throw InternalError("constructed step sizes violate the theorem premises");
  return s;
}

/// Rejects malformed configurations. Theory violations are returned as
/// warnings unless cfg.enforce_theory is set.
template <MinimaxProblem P>
std::vector<std::string> validate_config(const P& p, const OptimizerConfig& cfg) {
  if (!(cfg.eta1 >= 0.0) || !(cfg.eta2 >= 0.0) || !std::isfinite(cfg.eta1) ||
      !std::isfinite(cfg.eta2))
    throw InvalidArgument("step sizes must be finite and non-negative");
  if (cfg.epochs < 0) throw InvalidArgument("epoch count must be >= 0");
  if (cfg.algorithm == Algorithm::Sgda &&
      (cfg.batch_size < 1 || cfg.batch_size > p.num_samples()))
    throw InvalidArgument("batch_size must lie in [1, n]");

  std::vector<std::string> warnings;
  if (cfg.algorithm == Algorithm::VrShuffle) {
    const auto c = check_theorem1_conditions(p.smoothness(), p.strong_concavity(), cfg.eta1,
                                             cfg.eta2);
    if (!c.all()) {
      std::vector<std::string> broken;
      if (!c.eta2_bound) broken.emplace_back("eta2 > 1/(8l)");
      if (!c.ratio_bound) broken.emplace_back("eta2/eta1 < 14 kappa^2");
      if (!c.sum_of_squares) broken.emplace_back("eta1^2 + eta2^2 > 1/(4l^2)");
      std::string msg = "step sizes outside the convergence theorem premises: ";
      for (std::size_t k = 0; k < broken.size(); ++k) msg += (k ? "; " : "") + broken[k];
      if (cfg.enforce_theory) throw InvalidArgument(msg);
      warnings.push_back(std::move(msg));
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Variance-reduced shuffling epoch
// ---------------------------------------------------------------------------

struct EpochState {
  Vector x;
  Vector y;
  Vector anchor_x;
  Vector anchor_y;
  Vector anchor_gx;
  Vector anchor_gy;
  Index inner_index = 0;
  /// Running sum of ||z_t - z_t^j||^2; equals B_t once inner_index == n.
  double deviation_accum = 0.0;
  std::int64_t epoch = 0;
  OracleCounter calls{};
};

/// Anchors an epoch at (x, y): one full-gradient pass (n calls per block).
/// When `cache` is non-null the per-sample anchor gradients are stored in it.
template <MinimaxProblem P>
EpochState begin_epoch(const P& p, Vector x, Vector y, std::int64_t epoch, OracleCounter calls,
                       AnchorCache* cache = nullptr) {
  FullGradientPair g = cache != nullptr ? full_gradient(p, x, y, *cache) : full_gradient(p, x, y);
  calls.x_calls += g.oracle_calls;
  calls.y_calls += g.oracle_calls;
  EpochState s;
  s.anchor_x = x;
  s.anchor_y = y;
  s.x = std::move(x);
  s.y = std::move(y);
  s.anchor_gx = std::move(g.gx);
  s.anchor_gy = std::move(g.gy);
  s.epoch = epoch;
  s.calls = calls;
  return s;
}

/// What an observer sees at inner step j (before x, y are updated).
struct InnerStep {
  Index j;
  Index sample;
  const Vector& h;
  const Vector& d;
};

using InnerObserver = std::function<void(const InnerStep&)>;

namespace detail {

inline void guard_iterate(const Vector& x, const Vector& y, std::int64_t epoch, Index inner) {
  // One pass per block: a NaN or Inf entry makes the squared norm non-finite.
  constexpr double limit = kDivergenceNorm * kDivergenceNorm;
  const double nx = x.squaredNorm();
  const double ny = y.squaredNorm();
  if (nx <= limit && ny <= limit) return;
  if (!x.allFinite() || !y.allFinite())
    throw NumericFailure("non-finite iterate", {.epoch = epoch, .inner = inner});
  throw NumericFailure("iterate norm exceeded 1e12 (diverged)", {.epoch = epoch, .inner = inner});
}

}  // namespace detail

/// Runs the n inner steps of one epoch. `state` must come from begin_epoch.
/// With `cache` the anchor per-sample gradients are read from it instead of
/// being recomputed (n instead of 2n inner calls per block).
template <MinimaxProblem P>
EpochState vr_shuffle_epoch(const P& p, EpochState state, const Permutation& perm,
                            const OptimizerConfig& cfg, const AnchorCache* cache = nullptr,
                            const InnerObserver& observer = {}) {
  const Index n = p.num_samples();
  if (perm.size() != n)
    throw InvalidArgument("permutation length " + std::to_string(perm.size()) +
                          " does not match n = " + std::to_string(n));
  if (cache != nullptr && cache->size() != n)
    throw InvalidArgument("anchor cache sized for a different problem");

  const double step_x = cfg.eta1 / static_cast<double>(n);
  const double step_y = cfg.eta2 / static_cast<double>(n);
  const Index dx = p.dim_x();
  const Index dy = p.dim_y();

  Vector git_x(dx), gan_x(dx), h(dx), x_next(dx);
  Vector git_y(dy), gan_y(dy), d(dy);

  Vector& x = state.x;
  Vector& y = state.y;
  state.deviation_accum = 0.0;

  for (Index j = 0; j < n; ++j) {
    const Index i = perm[j];
    state.inner_index = j;
    state.deviation_accum +=
        (state.anchor_x - x).squaredNorm() + (state.anchor_y - y).squaredNorm();

    counted_grad_x(p, i, x, y, git_x, state.calls);
    if (cache != nullptr)
      gan_x = cache->gx(i);
    else
      counted_grad_x(p, i, state.anchor_x, state.anchor_y, gan_x, state.calls);
    h = state.anchor_gx + (git_x - gan_x);

    if (cfg.coupling == Coupling::Jacobi) counted_grad_y(p, i, x, y, git_y, state.calls);

    x_next = x - step_x * h;
    project_x(p, x_next);

    if (cfg.coupling == Coupling::GaussSeidel)
      counted_grad_y(p, i, x_next, y, git_y, state.calls);
    if (cache != nullptr)
      gan_y = cache->gy(i);
    else
      counted_grad_y(p, i, state.anchor_x, state.anchor_y, gan_y, state.calls);
    d = state.anchor_gy + (git_y - gan_y);

    if (observer) observer(InnerStep{j, i, h, d});

    y = y + step_y * d;
    project_y(p, y);
    x.swap(x_next);

    detail::guard_iterate(x, y, state.epoch, j);
  }
  state.inner_index = n;
  return state;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Simultaneous full-gradient two-timescale GDA step (n calls per block).
template <MinimaxProblem P>
std::pair<Vector, Vector> gda_step(const P& p, const Vector& x, const Vector& y, double eta1,
                                   double eta2, OracleCounter& calls) {
  const FullGradientPair g = full_gradient(p, x, y);
  calls.x_calls += g.oracle_calls;
  calls.y_calls += g.oracle_calls;
  Vector x_next = x - eta1 * g.gx;
  Vector y_next = y + eta2 * g.gy;
  project_x(p, x_next);
  project_y(p, y_next);
  return {std::move(x_next), std::move(y_next)};
}

template <MinimaxProblem P>
std::pair<Vector, Vector> gda_step(const P& p, const Vector& x, const Vector& y, double eta1,
                                   double eta2) {
  OracleCounter ignored;
  return gda_step(p, x, y, eta1, eta2, ignored);
}

/// Draws one index in [0, n) per call.
template <typename S>
concept IndexSampler = requires(S& s, Index n) {
  { s(n) } -> std::convertible_to<Index>;
};

/// Uniform with-replacement sampling from a seeded stream.
class UniformSampler {
 public:
  explicit UniformSampler(std::mt19937_64 rng) : rng_(std::move(rng)) {}
  Index operator()(Index n) { return std::uniform_int_distribution<Index>(0, n - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

/// Batch-averaged gradient estimate at (x, y) from `batch` sampled indices,
/// accumulated in draw order.
template <MinimaxProblem P, IndexSampler S>
std::pair<Vector, Vector> sgda_gradient_estimate(const P& p, const Vector& x, const Vector& y,
                                                 Index batch, S& sampler, OracleCounter& calls) {
  const Index n = p.num_samples();
  Vector gx = Vector::Zero(p.dim_x());
  Vector gy = Vector::Zero(p.dim_y());
  Vector tx(p.dim_x()), ty(p.dim_y());
  for (Index k = 0; k < batch; ++k) {
    const Index i = sampler(n);
    if (i < 0 || i >= n) throw InternalError("sampler returned an index outside [0, n)");
    counted_grad_x(p, i, x, y, tx, calls);
    counted_grad_y(p, i, x, y, ty, calls);
    gx += tx;
    gy += ty;
  }
  gx /= static_cast<double>(batch);
  gy /= static_cast<double>(batch);
  return {std::move(gx), std::move(gy)};
}

/// ceil(n / batch) simultaneous minibatch steps with indices drawn with
/// replacement.
template <MinimaxProblem P, IndexSampler S>
std::pair<Vector, Vector> sgda_epoch(const P& p, Vector x, Vector y, const OptimizerConfig& cfg,
                                     S& sampler, OracleCounter& calls,
                                     std::int64_t epoch = 0) {
  const Index n = p.num_samples();
  const Index b = cfg.batch_size;
  if (b < 1 || b > n) throw InvalidArgument("batch_size must lie in [1, n]");
  const Index steps = (n + b - 1) / b;
  for (Index s = 0; s < steps; ++s) {
    auto [gx, gy] = sgda_gradient_estimate(p, x, y, b, sampler, calls);
    x -= cfg.eta1 * gx;
    y += cfg.eta2 * gy;
    project_x(p, x);
    project_y(p, y);
    detail::guard_iterate(x, y, epoch, s);
  }
  return {std::move(x), std::move(y)};
}

/// Sampling stream used by run() for SGDA epoch `epoch`.
inline UniformSampler sgda_sampler(const OptimizerConfig& cfg, std::int64_t epoch) {
  return UniformSampler(make_rng(cfg.seed, static_cast<std::uint64_t>(epoch),
                                 RngStream::kSgdaSampling));
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

/// Iterate-level hook: fills metric columns of the row for (x_t, y_t).
struct IterateContext {
  std::int64_t t;
  const Vector& x;
  const Vector& y;
};
using MetricHook = std::function<void(const IterateContext&, TrajectoryRecord&)>;

/// Epoch-level hook (variance-reduced method only): sees the finished epoch
/// state and fills diagnostics into the row of the epoch's starting iterate.
struct EpochContext {
  const EpochState& state;
  const OptimizerConfig& cfg;
  Index n;
};
using EpochHook = std::function<void(const EpochContext&, TrajectoryRecord&)>;

struct RunHooks {
  std::vector<MetricHook> at_iterate;
  std::vector<EpochHook> after_epoch;
};

struct RunOptions {
  bool record_wall_time = false;
  std::size_t max_cache_bytes = AnchorCache::kDefaultMaxBytes;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::vector<std::string> warnings;
};

/// Numeric failure during run(); keeps the rows produced so far.
class RunAborted : public NumericFailure {
 public:
  RunAborted(const NumericFailure& cause, RunResult partial)
      : NumericFailure(cause), partial_(std::move(partial)) {}
  const RunResult& partial() const noexcept { return partial_; }

 private:
  RunResult partial_;
};

/// Executes epochs t = 0..cfg.epochs from (x0, y0). Emits cfg.epochs + 2
/// rows: the initial iterate and one after each epoch.
template <MinimaxProblem P>
RunResult run(const P& p, const OptimizerConfig& cfg, const Vector& x0, const Vector& y0,
              const RunHooks& hooks = {}, const RunOptions& options = {}) {
  detail::check_dims(p, x0, y0);
  if (!x0.allFinite() || !y0.allFinite()) throw InvalidArgument("initial point is not finite");

  RunResult result;
  result.warnings = validate_config(p, cfg);
  const std::string algo = algorithm_id(cfg);
  const Index n = p.num_samples();

  AnchorCache cache;
  bool use_cache = cfg.algorithm == Algorithm::VrShuffle && cfg.cache_anchors;
  if (use_cache) {
    try {
      cache = AnchorCache(n, p.dim_x(), p.dim_y(), options.max_cache_bytes);
    } catch (const ResourceExhausted& e) {
      result.warnings.push_back(std::string("anchor cache disabled: ") + e.what());
      use_cache = false;
    }
  }

  Vector x = x0;
  Vector y = y0;
  OracleCounter calls;
  double elapsed_ms = 0.0;

  auto emit = [&](std::int64_t t) {
    TrajectoryRecord rec;
    rec.epoch = t;
    rec.oracle_calls = calls.joint();
    rec.seed = cfg.seed;
    rec.algorithm = algo;
    if (options.record_wall_time) rec.set(Column::wall_ms, elapsed_ms);
    const IterateContext ctx{t, x, y};
    for (const auto& hook : hooks.at_iterate) hook(ctx, rec);
    result.records.push_back(std::move(rec));
    for (const auto& v : result.records.back().values)
      if (v && !std::isfinite(*v))
        throw RunAborted(NumericFailure("non-finite metric", {.epoch = t}), result);
  };

  emit(0);
  for (std::int64_t t = 0; t <= cfg.epochs; ++t) {
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (cfg.algorithm) {
        case Algorithm::VrShuffle: {
          const Permutation perm = permutation_for_epoch(cfg.scheme, t, n);
          EpochState state = begin_epoch(p, x, y, t, calls, use_cache ? &cache : nullptr);
          state = vr_shuffle_epoch(p, std::move(state), perm, cfg, use_cache ? &cache : nullptr);
          calls = state.calls;
          elapsed_ms += std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
          const EpochContext ctx{state, cfg, n};
          for (const auto& hook : hooks.after_epoch) hook(ctx, result.records.back());
          x = std::move(state.x);
          y = std::move(state.y);
          break;
        }
        case Algorithm::Gda: {
          auto [xn, yn] = gda_step(p, x, y, cfg.eta1, cfg.eta2, calls);
          detail::guard_iterate(xn, yn, t, 0);
          x = std::move(xn);
          y = std::move(yn);
          break;
        }
        case Algorithm::Sgda: {
          auto sampler = sgda_sampler(cfg, t);
          auto [xn, yn] = sgda_epoch(p, std::move(x), std::move(y), cfg, sampler, calls, t);
          x = std::move(xn);
          y = std::move(yn);
          break;
        }
      }
    } catch (const NumericFailure& e) {
      throw RunAborted(e, result);
    }
    if (cfg.algorithm != Algorithm::VrShuffle)
      elapsed_ms +=
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
    emit(t + 1);
  }
  return result;
}

}  // namespace shufgda

#endif  // SHUFGDA_OPTIM_HPP
