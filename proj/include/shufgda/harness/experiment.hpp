#ifndef SHUFGDA_HARNESS_EXPERIMENT_HPP
#define SHUFGDA_HARNESS_EXPERIMENT_HPP

// Experiment execution: problem construction by name, the standard metric
// hooks, single runs, learning-rate grids and matched-budget comparisons.
//
// Runs are independent; grid and compare may execute them on several worker
// threads. Every run writes its own CSV, and summaries are written after all
// runs finish, so output never depends on scheduling.

#include "shufgda/data.hpp"
#include "shufgda/errors.hpp"
#include "shufgda/harness/config.hpp"
#include "shufgda/harness/csv.hpp"
#include "shufgda/harness/svg.hpp"
#include "shufgda/harness/text.hpp"
#include "shufgda/metrics/stationarity.hpp"
#include "shufgda/optim.hpp"
#include "shufgda/problems/dro_logistic.hpp"
#include "shufgda/problems/poison_logistic.hpp"
#include "shufgda/problems/quadratic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

namespace shufgda::harness {

using AnyProblem =
    std::variant<problems::QuadraticNCSC, problems::DROLogistic, problems::PoisonLogistic>;

inline std::uint64_t instance_seed(const ExperimentConfig& c, std::uint64_t run_seed) {
  return c.problem_seed ? *c.problem_seed : run_seed;
}

/// Dataset for the DRO problem: the libsvm file when given, else the synthetic
/// surrogate; optionally subsampled.
inline DatasetMatrix dro_dataset(const DroParams& d, std::uint64_t seed) {
  DatasetMatrix ds = d.data.empty()
                         ? make_sparse_binary(d.synthetic_n, d.synthetic_dim, d.synthetic_active, seed)
                         : parse_libsvm_file(d.data);
  if (d.subsample > 0 && d.subsample < ds.n()) ds = subsample(ds, d.subsample, seed);
  return ds;
}

inline AnyProblem make_problem(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.problem == "quadratic") {
    const auto& q = c.quadratic;
    return problems::make_quadratic(q.dim_x, q.dim_y, q.n, q.kappa, seed);
  }
  if (c.problem == "dro-logistic") {
    const auto& d = c.dro;
    return problems::DROLogistic(dro_dataset(d, seed),
                                 d.lambda1.value_or(std::numeric_limits<double>::quiet_NaN()),
                                 d.lambda2, d.alpha);
  }
  if (c.problem == "poison-logistic") {
    const auto& p = c.poison;
    problems::PoisonOptions opt;
    opt.n = p.n;
    opt.d = p.d;
    opt.epsilon = p.epsilon;
    opt.poison_ratio = p.poison_ratio;
    opt.train_fraction = p.train_fraction;
    opt.noise_variance = p.noise_variance;
    opt.theta_radius = p.theta_radius;
    return problems::make_poisoning_instance(seed, opt).problem;
  }
  throw InvalidArgument("unknown problem '" + c.problem + "'");
}

/// Metric a grid search minimises by default.
inline Column default_objective(const std::string& problem) {
  // The attacker's goal in the poisoning game is low test accuracy.
  if (problem == "poison-logistic") return Column::accuracy;
  return Column::phi;
}

inline Column objective_column(const ExperimentConfig& c) {
  if (c.objective.empty()) return default_objective(c.problem);
  return *column_from_name(c.objective);
}

/// x0 = 0; y0 = 0, or the uniform distribution when the dual is a simplex.
template <MinimaxProblem P>
std::pair<Vector, Vector> initial_point(const P& p) {
  Vector x0 = Vector::Zero(p.dim_x());
  Vector y0 = Vector::Zero(p.dim_y());
  if constexpr (std::is_same_v<P, problems::DROLogistic>)
    y0.setConstant(1.0 / static_cast<double>(p.dim_y()));
  return {std::move(x0), std::move(y0)};
}

/// Whether Phi(x) = max_y f(x, y) is well defined (strong concavity holds).
template <typename P>
inline constexpr bool has_primal_function_v = !std::is_same_v<P, problems::PoisonLogistic>;

struct HookOptions {
  double lambda = 4.0;
  double inner_tol = metrics::kDefaultInnerTol;
  std::int64_t cadence = 1;
  /// Row index of the last record; always evaluated.
  std::int64_t last_row = -1;
};

/// Metric hooks per problem:
///   all:           grad_f_norm, grad_f_proj_norm (constrained duals)
///   Phi defined:   phi, grad_phi_norm, potential_shifted (+ potential_exact when Phi* known)
///   poisoning:     accuracy on the test split
///   VR epochs:     B_t, and lemma3_slack on unconstrained problems
template <MinimaxProblem P>
RunHooks standard_hooks(const P& p, const HookOptions& o) {
  RunHooks hooks;
  hooks.at_iterate.push_back([&p, o](const IterateContext& ctx, TrajectoryRecord& rec) {
    if (ctx.t % o.cadence != 0 && ctx.t != o.last_row) return;
    const auto gap = metrics::game_stationarity(p, ctx.x, ctx.y);
    rec.set(Column::grad_f_norm, gap.raw);
    if constexpr (!is_unconstrained_v<P>) rec.set(Column::grad_f_proj_norm, gap.projected);
    if constexpr (has_primal_function_v<P>) {
      const auto est = metrics::estimate_phi(p, ctx.x, o.inner_tol);
      rec.set(Column::phi, est.phi);
      rec.set(Column::grad_phi_norm, est.grad_phi.norm());
      const double f = p.value(ctx.x, ctx.y);
      rec.set(Column::potential_shifted, (o.lambda + 1.0) * est.phi - f);
      if constexpr (HasPhiStar<P>)
        rec.set(Column::potential_exact, o.lambda * (est.phi - p.phi_star()) + est.phi - f);
    }
    if constexpr (std::is_same_v<P, problems::PoisonLogistic>)
      rec.set(Column::accuracy, problems::prediction_accuracy(ctx.x, p.test()));
  });
  hooks.after_epoch.push_back([&p](const EpochContext& ctx, TrajectoryRecord& rec) {
    rec.set(Column::B_t, ctx.state.deviation_accum);
    if constexpr (is_unconstrained_v<P>) {
      const auto chk = metrics::deviation_bound_check(p, ctx.state, ctx.cfg.eta1, ctx.cfg.eta2);
      if (chk.status != metrics::DeviationCheck::Status::NotApplicable && chk.deviation > 0.0)
        rec.set(Column::lemma3_slack, chk.slack);
    }
  });
  return hooks;
}

/// Per-sample gradient calls one epoch of `cfg` consumes on an n-sample problem.
inline std::int64_t epoch_cost(const OptimizerConfig& cfg, Index n) {
  switch (cfg.algorithm) {
    case Algorithm::VrShuffle: return (cfg.cache_anchors ? 2 : 3) * n;
    case Algorithm::Gda: return n;
    case Algorithm::Sgda: return ((n + cfg.batch_size - 1) / cfg.batch_size) * cfg.batch_size;
  }
  return n;
}

/// Executed epochs that fit in `budget` calls (at least one).
inline std::int64_t epochs_for_budget(const OptimizerConfig& cfg, Index n, std::int64_t budget) {
  return std::max<std::int64_t>(1, budget / epoch_cost(cfg, n));
}

struct RunOutcome {
  OptimizerConfig cfg;
  RunResult result;
  bool aborted = false;
  std::string message;
  Vector x_final;
  Vector y_final;
  std::string csv_path;
};

/// One run with the standard hooks; numeric failures are caught and reported
/// in the outcome together with the rows produced so far.
template <MinimaxProblem P>
RunOutcome execute(const P& p, const OptimizerConfig& cfg, const ExperimentConfig& c) {
  RunOutcome out;
  out.cfg = cfg;
  auto [x0, y0] = initial_point(p);
  HookOptions ho;
  ho.lambda = c.lambda;
  ho.inner_tol = c.inner_tol;
  ho.cadence = c.cadence;
  ho.last_row = cfg.epochs + 1;
  RunHooks hooks = standard_hooks(p, ho);
  hooks.at_iterate.push_back([&out](const IterateContext& ctx, TrajectoryRecord&) {
    out.x_final = ctx.x;
    out.y_final = ctx.y;
  });
  RunOptions ro;
  ro.record_wall_time = c.wall_time;
  try {
    out.result = run(p, cfg, x0, y0, hooks, ro);
  } catch (const RunAborted& e) {
    out.result = e.partial();
    out.aborted = true;
    out.message = e.what();
  }
  return out;
}

/// Optimizer settings for (algo, seed) on problem p: theorem step sizes when
/// requested, the budget converted to epochs, and the IG order file.
template <MinimaxProblem P>
OptimizerConfig resolve_optimizer(const P& p, const ExperimentConfig& c, const std::string& algo,
                                  std::uint64_t seed) {
  OptimizerConfig o = optimizer_config(c, algo, seed);
  if (c.theorem1_steps) {
    const auto s = theorem1_step_sizes(p.smoothness(), p.strong_concavity(), c.eta2_fraction,
                                       c.r_multiplier);
    o.eta1 = s.eta1;
    o.eta2 = s.eta2;
  }
  if (c.budget) o.epochs = epochs_for_budget(o, p.num_samples(), *c.budget) - 1;
  if (!c.ig_order.empty() && o.scheme.variant == Scheme::IG)
    o.scheme.ig_order = read_order_file(c.ig_order, p.num_samples());
  return o;
}

inline std::string run_file_name(const ExperimentConfig& c, const std::string& algo,
                                 std::uint64_t seed) {
  return "run_" + c.problem + "_" + algo + "_s" + std::to_string(seed) + ".csv";
}

inline std::string cell_file_name(const ExperimentConfig& c, const std::string& algo, double eta1,
                                  double eta2, std::uint64_t seed) {
  return "grid_" + c.problem + "_" + algo + "_e1-" + format_double(eta1) + "_e2-" +
         format_double(eta2) + "_s" + std::to_string(seed) + ".csv";
}

/// Runs `tasks` on `jobs` threads (in order when jobs == 1).
inline void run_parallel(std::vector<std::function<void()>>& tasks, int jobs) {
  if (jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        tasks[k]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size());
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Problem instances keyed by instance seed, built once and shared read-only.
class ProblemCache {
 public:
  explicit ProblemCache(const ExperimentConfig& c) : cfg_(c) {}

  const AnyProblem& get(std::uint64_t run_seed) {
    const std::uint64_t s = instance_seed(cfg_, run_seed);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(s);
    if (it == cache_.end()) it = cache_.emplace(s, make_problem(cfg_, s)).first;
    return it->second;
  }

 private:
  const ExperimentConfig& cfg_;
  std::mutex mu_;
  std::map<std::uint64_t, AnyProblem> cache_;
};

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error("cannot create output directory '" + dir + "'");
}

inline std::string path_join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

/// Writes the outcome's CSV and, for aborted runs, a diagnostic file next to it.
inline void persist(RunOutcome& out, const std::string& path) {
  out.csv_path = path;
  if (!out.result.records.empty()) write_csv(out.result.records, path);
  if (out.aborted) {
    std::ofstream diag(path + ".diag.txt");
    diag << "run aborted: " << out.message << '\n';
    diag << "rows written: " << out.result.records.size() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Single run
// ---------------------------------------------------------------------------

/// One problem x algorithm x seed execution; the CSV goes to `csv_path`.
inline RunOutcome run_single(const ExperimentConfig& c, const std::string& algo,
                             std::uint64_t seed, const std::string& csv_path) {
  validate(c);
  const AnyProblem problem = make_problem(c, instance_seed(c, seed));
  RunOutcome out = std::visit(
      [&](const auto& p) { return execute(p, resolve_optimizer(p, c, algo, seed), c); }, problem);
  persist(out, csv_path);
  return out;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

/// Last value of `col` in the records (the final evaluated row).
inline std::optional<double> final_value(const std::vector<TrajectoryRecord>& recs, Column col) {
  for (auto it = recs.rbegin(); it != recs.rend(); ++it)
    if (const auto v = it->get(col)) return v;
  return std::nullopt;
}

inline std::optional<double> min_value(const std::vector<TrajectoryRecord>& recs, Column col) {
  std::optional<double> best;
  for (const auto& r : recs)
    if (const auto v = r.get(col)) best = best ? std::min(*best, *v) : *v;
  return best;
}

/// Median; +inf entries (failed runs) sort last.
inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::string cell_text(const std::optional<double>& v) {
  return v ? format_double17(*v) : std::string();
}

/// Metrics summarised in grid and compare tables.
inline const std::vector<Column>& summary_columns() {
  static const std::vector<Column> cols = {Column::phi,         Column::grad_phi_norm,
                                           Column::grad_f_norm, Column::grad_f_proj_norm,
                                           Column::potential_shifted, Column::accuracy};
  return cols;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

struct GridCell {
  std::string algorithm;
  double eta1 = 0.0;
  double eta2 = 0.0;
  std::uint64_t seed = 0;
  RunOutcome outcome;
};

struct GridChoice {
  std::string algorithm;
  double eta1 = 0.0;
  double eta2 = 0.0;
  /// Median over seeds of the final objective (+inf when a run failed).
  double median_objective = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::vector<GridChoice> best;
  Column objective = Column::phi;
};

/// Per algorithm, the (eta1, eta2) with the smallest median final objective.
/// Aborted runs and missing values count as +inf; ties keep the first cell in
/// grid order.
inline std::vector<GridChoice> select_best(const std::vector<GridCell>& cells, Column objective,
                                           const std::vector<std::string>& algorithms) {
  std::vector<GridChoice> best;
  for (const auto& algo : algorithms) {
    std::vector<std::pair<double, double>> keys;
    for (const auto& c : cells)
      if (c.algorithm == algo &&
          std::find(keys.begin(), keys.end(), std::make_pair(c.eta1, c.eta2)) == keys.end())
        keys.emplace_back(c.eta1, c.eta2);
    GridChoice choice{algo, 0.0, 0.0, std::numeric_limits<double>::infinity()};
    bool any = false;
    for (const auto& [e1, e2] : keys) {
      std::vector<double> finals;
      for (const auto& c : cells)
        if (c.algorithm == algo && c.eta1 == e1 && c.eta2 == e2) {
          const auto v = c.outcome.aborted ? std::nullopt
                                           : final_value(c.outcome.result.records, objective);
          finals.push_back(v && std::isfinite(*v) ? *v : std::numeric_limits<double>::infinity());
        }
      const double m = median(finals);
      if (!any || m < choice.median_objective) {
        choice = {algo, e1, e2, m};
        any = true;
      }
    }
    if (any) best.push_back(choice);
  }
  return best;
}

/// Cartesian product algorithms x eta1_grid x eta2_grid x seeds. With
/// `write_files` one CSV per cell plus grid_summary.csv and grid_best.csv are
/// written to c.output.
inline GridResult run_grid(const ExperimentConfig& c, bool write_files = true) {
  validate(c);
  if (write_files) ensure_directory(c.output);
  ProblemCache problems(c);
  GridResult res;
  res.objective = objective_column(c);
  for (const auto& algo : c.algorithms)
    for (double e1 : c.eta1_grid)
      for (double e2 : c.eta2_grid)
        for (auto seed : c.seeds) res.cells.push_back(GridCell{algo, e1, e2, seed, {}});
  // Instances are built up front so worker threads only read them.
  for (auto seed : c.seeds) problems.get(seed);

  std::vector<std::function<void()>> tasks;
  for (auto& cell : res.cells)
    tasks.emplace_back([&c, &cell, &problems, write_files] {
      ExperimentConfig local = c;
      local.eta1 = cell.eta1;
      local.eta2 = cell.eta2;
      local.theorem1_steps = false;
      local.steps.clear();
      const AnyProblem& problem = problems.get(cell.seed);
      cell.outcome = std::visit(
          [&](const auto& p) {
            return execute(p, resolve_optimizer(p, local, cell.algorithm, cell.seed), local);
          },
          problem);
      if (write_files)
        persist(cell.outcome,
                path_join(c.output, cell_file_name(c, cell.algorithm, cell.eta1, cell.eta2, cell.seed)));
    });
  run_parallel(tasks, c.jobs);
  res.best = select_best(res.cells, res.objective, c.algorithms);

  if (write_files) {
    std::vector<std::string> header = {"algorithm", "eta1", "eta2", "seed", "status",
                                       "epochs",    "oracle_calls"};
    for (Column col : summary_columns()) header.push_back("final_" + std::string(column_name(col)));
    for (Column col : summary_columns()) header.push_back("best_" + std::string(column_name(col)));
    std::vector<std::vector<std::string>> rows;
    for (const auto& cell : res.cells) {
      const auto& recs = cell.outcome.result.records;
      std::vector<std::string> row = {cell.algorithm,
                                      format_double(cell.eta1),
                                      format_double(cell.eta2),
                                      std::to_string(cell.seed),
                                      cell.outcome.aborted ? "aborted" : "ok",
                                      std::to_string(recs.empty() ? 0 : recs.back().epoch),
                                      std::to_string(recs.empty() ? 0 : recs.back().oracle_calls)};
      for (Column col : summary_columns()) row.push_back(cell_text(final_value(recs, col)));
      for (Column col : summary_columns()) row.push_back(cell_text(min_value(recs, col)));
      rows.push_back(std::move(row));
    }
    write_table_file(header, rows, path_join(c.output, "grid_summary.csv"));

    std::vector<std::vector<std::string>> best_rows;
    for (const auto& b : res.best)
      best_rows.push_back({b.algorithm, format_double(b.eta1), format_double(b.eta2),
                           std::string(column_name(res.objective)),
                           format_double17(b.median_objective)});
    write_table_file({"algorithm", "eta1", "eta2", "objective", "median_final"}, best_rows,
                     path_join(c.output, "grid_best.csv"));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Compare
// ---------------------------------------------------------------------------

struct CompareRow {
  std::string algorithm;
  /// Seed, or "median" for the across-seed aggregate.
  std::string seed;
  std::int64_t checkpoint = 0;
  std::array<std::optional<double>, kColumnCount> values{};
};

struct CompareResult {
  std::vector<RunOutcome> runs;
  std::vector<GridChoice> steps;
  std::vector<std::int64_t> checkpoints;
  std::vector<CompareRow> rows;
  std::int64_t budget = 0;
};

/// Value of each column in the last evaluated record with oracle_calls <= budget.
inline std::array<std::optional<double>, kColumnCount> values_at(
    const std::vector<TrajectoryRecord>& recs, std::int64_t budget) {
  std::array<std::optional<double>, kColumnCount> out{};
  for (const auto& r : recs) {
    if (r.oracle_calls > budget) break;
    for (std::size_t k = 0; k < kColumnCount; ++k)
      if (r.values[k]) out[k] = r.values[k];
  }
  return out;
}

/// Every algorithm runs until it has spent the same number of per-sample
/// gradient calls (c.budget, default 2n per requested epoch). Results are
/// sampled on a shared checkpoint grid of multiples of 2n. With c.tune the
/// step sizes come from a grid search at the same budget.
inline CompareResult run_compare(const ExperimentConfig& cin, bool write_files = true) {
  validate(cin);
  ExperimentConfig c = cin;
  if (write_files) ensure_directory(c.output);
  ProblemCache problems(c);
  for (auto seed : c.seeds) problems.get(seed);
  const Index n = std::visit([](const auto& p) { return p.num_samples(); },
                             problems.get(c.seeds.front()));
  if (!c.budget) c.budget = 2 * n * c.epochs;

  CompareResult res;
  res.budget = *c.budget;
  if (c.tune) {
    ExperimentConfig g = c;
    g.output = path_join(c.output, "tuning");
    res.steps = run_grid(g, write_files).best;
  } else {
    for (const auto& algo : c.algorithms) {
      const OptimizerConfig o = std::visit(
          [&](const auto& p) { return resolve_optimizer(p, c, algo, c.seeds.front()); },
          problems.get(c.seeds.front()));
      res.steps.push_back({algo, o.eta1, o.eta2, std::numeric_limits<double>::quiet_NaN()});
    }
  }

  res.runs.resize(res.steps.size() * c.seeds.size());
  std::vector<std::function<void()>> tasks;
  std::size_t k = 0;
  for (const auto& choice : res.steps)
    for (auto seed : c.seeds) {
      RunOutcome* slot = &res.runs[k++];
      tasks.emplace_back([&c, &problems, choice, seed, slot, write_files] {
        ExperimentConfig local = c;
        local.eta1 = choice.eta1;
        local.eta2 = choice.eta2;
        local.theorem1_steps = false;
        local.steps.clear();
        *slot = std::visit(
            [&](const auto& p) {
              return execute(p, resolve_optimizer(p, local, choice.algorithm, seed), local);
            },
            problems.get(seed));
        if (write_files)
          persist(*slot, path_join(c.output, "compare_" + run_file_name(c, choice.algorithm, seed)));
      });
    }
  run_parallel(tasks, c.jobs);

  for (std::int64_t cp = 0; cp <= res.budget; cp += 2 * n) res.checkpoints.push_back(cp);
  k = 0;
  for (const auto& choice : res.steps) {
    const std::size_t first = k;
    for (auto seed : c.seeds) {
      const auto& recs = res.runs[k++].result.records;
      for (auto cp : res.checkpoints)
        res.rows.push_back({choice.algorithm, std::to_string(seed), cp, values_at(recs, cp)});
    }
    for (auto cp : res.checkpoints) {
      CompareRow agg{choice.algorithm, "median", cp, {}};
      for (std::size_t col = 0; col < kColumnCount; ++col) {
        std::vector<double> vals;
        for (std::size_t r = first; r < k; ++r) {
          const auto v = values_at(res.runs[r].result.records, cp)[col];
          if (v) vals.push_back(*v);
        }
        if (vals.size() == c.seeds.size()) agg.values[col] = median(vals);
      }
      res.rows.push_back(agg);
    }
  }

  if (write_files) {
    std::vector<std::string> header = {"algorithm", "seed", "oracle_calls"};
    for (Column col : summary_columns()) header.emplace_back(column_name(col));
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : res.rows) {
      std::vector<std::string> row = {r.algorithm, r.seed, std::to_string(r.checkpoint)};
      for (Column col : summary_columns()) row.push_back(cell_text(r.values[static_cast<std::size_t>(col)]));
      rows.push_back(std::move(row));
    }
    write_table_file(header, rows, path_join(c.output, "compare_summary.csv"));
    std::vector<std::vector<std::string>> step_rows;
    for (const auto& s : res.steps)
      step_rows.push_back({s.algorithm, format_double(s.eta1), format_double(s.eta2)});
    write_table_file({"algorithm", "eta1", "eta2"}, step_rows,
                     path_join(c.output, "compare_steps.csv"));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> metrics;  // empty: every metric present
  bool log_y = true;
  std::string output_dir = ".";
};

struct ReportResult {
  std::vector<std::string> svg_files;
  std::string table;
};

/// Reads trajectory CSVs and writes, per metric, one plot against epochs and
/// one against oracle calls. Returns a text table of final values.
inline ReportResult make_report(const std::vector<std::string>& csv_files, const ReportOptions& o) {
  if (csv_files.empty()) throw InvalidArgument("no CSV files to report on");
  ensure_directory(o.output_dir);
  struct Loaded {
    std::string label;
    std::vector<TrajectoryRecord> recs;
  };
  std::vector<Loaded> loaded;
  for (const auto& f : csv_files) {
    Loaded l{std::filesystem::path(f).stem().string(), read_csv_file(f)};
    if (l.recs.empty()) throw InvalidArgument("'" + f + "' has no rows");
    loaded.push_back(std::move(l));
  }
  std::vector<Column> cols;
  if (o.metrics.empty()) {
    for (std::size_t k = 0; k < kColumnCount; ++k) {
      const auto col = static_cast<Column>(k);
      if (col == Column::wall_ms) continue;
      for (const auto& l : loaded)
        if (final_value(l.recs, col)) {
          cols.push_back(col);
          break;
        }
    }
  } else {
    for (const auto& m : o.metrics) {
      const auto col = column_from_name(m);
      if (!col) throw InvalidArgument("unknown metric '" + m + "'");
      cols.push_back(*col);
    }
  }

  ReportResult res;
  for (Column col : cols) {
    for (const bool by_calls : {false, true}) {
      std::vector<Series> series;
      for (const auto& l : loaded) {
        Series s{l.label, {}, {}};
        for (const auto& r : l.recs)
          if (const auto v = r.get(col)) {
            s.x.push_back(by_calls ? static_cast<double>(r.oracle_calls) : static_cast<double>(r.epoch));
            s.y.push_back(*v);
          }
        if (!s.x.empty()) series.push_back(std::move(s));
      }
      if (series.empty()) continue;
      PlotStyle style;
      style.title = std::string(column_name(col)) + (by_calls ? " vs gradient oracles" : " vs epoch");
      style.x_label = by_calls ? "per-sample gradient calls" : "epoch";
      style.y_label = std::string(column_name(col));
      // Signed quantities are plotted on a linear axis.
      style.log_y = o.log_y && col != Column::phi && col != Column::potential_shifted;
      const std::string file = path_join(
          o.output_dir, std::string(column_name(col)) + (by_calls ? "_vs_oracle.svg" : "_vs_epoch.svg"));
      std::ofstream out(file, std::ios::binary);
      if (!out) throw Error("cannot write '" + file + "'");
      out << render_svg(series, style);
      res.svg_files.push_back(file);
    }
  }

  // Text table: one line per file, final value per metric.
  std::string& t = res.table;
  t += "run";
  for (Column col : cols) t += '\t' + std::string(column_name(col));
  t += "\toracle_calls\n";
  for (const auto& l : loaded) {
    t += l.label;
    for (Column col : cols) {
      const auto v = final_value(l.recs, col);
      t += '\t' + (v ? format_double(*v) : std::string("-"));
    }
    t += '\t' + std::to_string(l.recs.back().oracle_calls) + '\n';
  }
  return res;
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_EXPERIMENT_HPP
