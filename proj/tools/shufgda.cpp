// shufgda command-line front end.
//
// Exit codes: 0 success, 1 runtime failure (numeric divergence, IO, network),
// 2 usage or configuration error.

#include "shufgda/harness/config.hpp"
#include "shufgda/harness/experiment.hpp"
#include "shufgda/harness/selftest.hpp"

#include "fetch.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace shufgda;
using namespace shufgda::harness;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Command-line flag bound to a config key. Flags given on the command line
/// override the config file.
struct KeyFlag {
  std::string flag;
  std::string section;
  std::string key;
  std::string help;
  bool boolean = false;
};

const std::vector<KeyFlag>& experiment_flags() {
  static const std::vector<KeyFlag> flags = {
      {"--problem", "problem", "name", "quadratic | dro-logistic | poison-logistic"},
      {"--problem-seed", "problem", "seed", "instance seed (default: the run seed)"},
      {"--dim-x", "quadratic", "dim_x", "quadratic: primal dimension"},
      {"--dim-y", "quadratic", "dim_y", "quadratic: dual dimension"},
      {"--n", "quadratic", "n", "quadratic: number of components"},
      {"--kappa", "quadratic", "kappa", "quadratic: condition number l/mu"},
      {"--data", "dro", "data", "dro: libsvm file (default: synthetic surrogate)"},
      {"--subsample", "dro", "subsample", "dro: rows kept (0 = all)"},
      {"--synthetic-n", "dro", "synthetic_n", "dro: surrogate rows"},
      {"--synthetic-dim", "dro", "synthetic_dim", "dro: surrogate features"},
      {"--lambda1", "dro", "lambda1", "dro: divergence weight (default 1/n^2)"},
      {"--lambda2", "dro", "lambda2", "dro: regularizer weight"},
      {"--alpha", "dro", "alpha", "dro: regularizer shape"},
      {"--poison-n", "poison", "n", "poison: total samples"},
      {"--poison-d", "poison", "d", "poison: features"},
      {"--epsilon", "poison", "epsilon", "poison: perturbation radius"},
      {"--poison-ratio", "poison", "poison_ratio", "poison: poisoned fraction of training rows"},
      {"--eta1", "optimizer", "eta1", "primal step size"},
      {"--eta2", "optimizer", "eta2", "dual step size"},
      {"--theorem1-steps", "optimizer", "theorem1_steps", "use the two-timescale theory step sizes", true},
      {"--eta2-fraction", "optimizer", "eta2_fraction", "theory steps: eta2 = fraction / (8 l)"},
      {"--r-multiplier", "optimizer", "r_multiplier", "theory steps: r = multiplier * 14 kappa^2"},
      {"--epochs", "optimizer", "epochs", "executed epochs (rows = epochs + 1)"},
      {"--budget", "optimizer", "budget", "per-sample gradient calls; overrides --epochs"},
      {"--batch-size", "optimizer", "batch_size", "SGDA minibatch size"},
      {"--cache-anchors", "optimizer", "cache_anchors", "store anchor gradients (2n calls per epoch)", true},
      {"--coupling", "optimizer", "coupling", "jacobi | gauss-seidel"},
      {"--enforce-theory", "optimizer", "enforce_theory", "reject step sizes outside the theory", true},
      {"--ig-order", "optimizer", "ig_order", "file with the fixed order for vr-ig"},
      {"--steps", "optimizer", "steps", "per-algorithm steps, e.g. vr-rr=0.01:0.1,sgda=0.1:0.1"},
      {"--eta1-grid", "grid", "eta1", "grid values for eta1"},
      {"--eta2-grid", "grid", "eta2", "grid values for eta2"},
      {"--objective", "grid", "objective", "metric minimised by grid selection"},
      {"--tune", "grid", "tune", "compare: pick steps by grid search first", true},
      {"--output,-o", "run", "output", "output directory"},
      {"--cadence", "run", "cadence", "evaluate metrics every k epochs"},
      {"--wall-time", "run", "wall_time", "record wall-clock column", true},
      {"--lambda", "run", "lambda", "potential weight"},
      {"--inner-tol", "run", "inner_tol", "tolerance of the inner maximisation"},
      {"--plot", "run", "plot", "write SVG plots next to the CSVs", true},
      {"--jobs,-j", "run", "jobs", "parallel runs"},
  };
  return flags;
}

/// Values captured from the command line for one subcommand.
struct ExperimentArgs {
  std::string config_path;
  std::map<std::string, std::string> values;  // flag -> text
  std::map<std::string, bool> switches;       // flag -> set
  std::string algos;
  std::string seeds;
  std::string lrs;
};

void add_experiment_flags(CLI::App* app, ExperimentArgs& a, bool single_run) {
  app->add_option("--config,-c", a.config_path, "config file (key = value sections)")
      ->check(CLI::ExistingFile);
  if (single_run) {
    app->add_option("--algo", a.algos, "algorithm: vr-ig | vr-so | vr-rr | sgda | gda; vr-* accept a +cache suffix");
    app->add_option("--seed", a.seeds, "run seed");
  } else {
    app->add_option("--algos,--algo", a.algos, "comma-separated algorithms (vr-* accept a +cache suffix)");
    app->add_option("--seeds,--seed", a.seeds, "seeds, e.g. 1..5 or 1,3,7");
    app->add_option("--lrs", a.lrs, "grid values used for both eta1 and eta2");
  }
  for (const auto& f : experiment_flags()) {
    if (f.boolean)
      app->add_flag(f.flag, a.switches[f.flag], f.help);
    else
      app->add_option(f.flag, a.values[f.flag], f.help);
  }
}

ExperimentConfig build_config(const CLI::App* app, const ExperimentArgs& a) {
  ExperimentConfig c;
  if (!a.config_path.empty()) c = load_config(a.config_path);
  for (const auto& f : experiment_flags()) {
    const std::string name = f.flag.substr(0, f.flag.find(','));
    if (app->count(name) == 0) continue;
    set_option(c, f.section, f.key, f.boolean ? "true" : a.values.at(f.flag));
  }
  if (!a.algos.empty()) set_option(c, "optimizer", "algorithms", a.algos);
  if (!a.seeds.empty()) set_option(c, "run", "seeds", a.seeds);
  if (!a.lrs.empty()) {
    set_option(c, "grid", "eta1", a.lrs);
    set_option(c, "grid", "eta2", a.lrs);
  }
  validate(c);
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

/// Plots every CSV in `files` into `dir` when plotting is on.
void maybe_plot(const ExperimentConfig& c, const std::vector<std::string>& files) {
  if (!c.plot || files.empty()) return;
  ReportOptions ro;
  ro.log_y = c.log_y;
  ro.output_dir = c.output;
  for (const auto& f : make_report(files, ro).svg_files) std::cout << "plot: " << f << '\n';
}

int cmd_run(const ExperimentConfig& c) {
  if (c.algorithms.size() != 1 || c.seeds.size() != 1)
    throw InvalidArgument("run takes exactly one algorithm and one seed (use grid or compare)");
  ensure_directory(c.output);
  const std::string& algo = c.algorithms.front();
  const auto seed = c.seeds.front();
  const std::string path = path_join(c.output, run_file_name(c, algo, seed));
  const RunOutcome out = run_single(c, algo, seed, path);
  print_warnings(out.result.warnings);
  if (out.aborted) {
    std::cerr << "error: " << out.message << "\n  partial trajectory: " << path
              << "\n  diagnostic: " << path << ".diag.txt\n";
    return kExitRuntime;
  }
  std::cout << path << " (" << out.result.records.size() << " rows, eta1="
            << format_double(out.cfg.eta1) << ", eta2=" << format_double(out.cfg.eta2) << ")\n";
  maybe_plot(c, {path});
  return 0;
}

int cmd_grid(const ExperimentConfig& c) {
  const GridResult g = run_grid(c);
  std::size_t aborted = 0;
  for (const auto& cell : g.cells) {
    if (!cell.outcome.aborted) continue;
    ++aborted;
    std::cerr << "note: " << cell.outcome.csv_path << " diverged (" << cell.outcome.message << ")\n";
  }
  std::cout << g.cells.size() << " runs, " << aborted << " diverged; summary: "
            << path_join(c.output, "grid_summary.csv") << '\n';
  for (const auto& b : g.best)
    std::cout << "best " << b.algorithm << ": eta1=" << format_double(b.eta1)
              << " eta2=" << format_double(b.eta2) << " median final "
              << column_name(g.objective) << "=" << format_double(b.median_objective) << '\n';
  return 0;
}

int cmd_compare(const ExperimentConfig& c) {
  const CompareResult r = run_compare(c);
  int rc = 0;
  std::vector<std::string> files;
  for (const auto& run : r.runs) {
    print_warnings(run.result.warnings);
    files.push_back(run.csv_path);
    if (run.aborted) {
      std::cerr << "error: " << run.csv_path << ": " << run.message
                << "\n  diagnostic: " << run.csv_path << ".diag.txt\n";
      rc = kExitRuntime;
    }
  }
  std::cout << "budget " << r.budget << " per-sample gradient calls, " << r.checkpoints.size()
            << " checkpoints; summary: " << path_join(c.output, "compare_summary.csv") << '\n';
  for (const auto& s : r.steps)
    std::cout << s.algorithm << ": eta1=" << format_double(s.eta1)
              << " eta2=" << format_double(s.eta2) << '\n';
  if (rc == 0) maybe_plot(c, files);
  return rc;
}

/// Expands directories to the trajectory CSVs they contain (summaries skipped).
std::vector<std::string> collect_csvs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (!std::filesystem::is_directory(in)) {
      files.push_back(in);
      continue;
    }
    std::vector<std::string> found;
    for (const auto& e : std::filesystem::directory_iterator(in)) {
      const auto name = e.path().filename().string();
      if (e.path().extension() == ".csv" && name.find("summary") == std::string::npos &&
          name.find("best") == std::string::npos && name.find("steps") == std::string::npos)
        found.push_back(e.path().string());
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  return files;
}

int cmd_selftest() {
  int failed = 0;
  for (const auto& o : run_selftests()) {
    std::cout << (o.passed ? "PASS" : "FAIL") << "  [" << o.module << "] " << o.name;
    if (!o.passed) std::cout << ": " << o.detail;
    std::cout << '\n';
    failed += o.passed ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all invariant suites passed\n"
                            : std::to_string(failed) + " check(s) failed\n");
  return failed == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shuffling gradient descent-ascent with variance reduction: experiments and tools"};
  app.require_subcommand(1);

  ExperimentArgs run_args, grid_args, compare_args;
  auto* run_cmd = app.add_subcommand("run", "one problem x algorithm x seed execution");
  add_experiment_flags(run_cmd, run_args, true);
  auto* grid_cmd = app.add_subcommand("grid", "learning-rate grid over algorithms and seeds");
  add_experiment_flags(grid_cmd, grid_args, false);
  auto* compare_cmd = app.add_subcommand("compare", "algorithms at a matched oracle budget");
  add_experiment_flags(compare_cmd, compare_args, false);

  auto* report_cmd = app.add_subcommand("report", "plots and a table from trajectory CSVs");
  std::vector<std::string> report_inputs;
  std::string report_metrics;
  std::string report_out = "report";
  bool report_linear = false;
  report_cmd->add_option("inputs", report_inputs, "CSV files or directories")->required();
  report_cmd->add_option("--metrics", report_metrics, "comma-separated metric columns");
  report_cmd->add_option("--output,-o", report_out, "directory for SVG files");
  report_cmd->add_flag("--linear-y", report_linear, "linear y axis for every metric");

  auto* fetch_cmd = app.add_subcommand("fetch-data", "download a9a with checksum verification");
  tools::FetchOptions fetch;
  fetch_cmd->add_option("--output,-o", fetch.path, "destination file");
  fetch_cmd->add_option("--url", fetch.url, "source URL");
  fetch_cmd->add_option("--sha256", fetch.sha256, "expected SHA-256 of the file (hex)");

  auto* selftest_cmd = app.add_subcommand("selftest", "run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  // Stage 1: configuration. Any failure here is a usage error.
  ExperimentConfig cfg;
  try {
    if (run_cmd->parsed()) cfg = build_config(run_cmd, run_args);
    if (grid_cmd->parsed()) cfg = build_config(grid_cmd, grid_args);
    if (compare_cmd->parsed()) cfg = build_config(compare_cmd, compare_args);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  // Stage 2: execution.
  try {
    if (run_cmd->parsed()) return cmd_run(cfg);
    if (grid_cmd->parsed()) return cmd_grid(cfg);
    if (compare_cmd->parsed()) return cmd_compare(cfg);
    if (report_cmd->parsed()) {
      ReportOptions ro;
      ro.metrics = split(report_metrics, ',');
      ro.log_y = !report_linear;
      ro.output_dir = report_out;
      const auto res = make_report(collect_csvs(report_inputs), ro);
      std::cout << res.table;
      for (const auto& f : res.svg_files) std::cout << "plot: " << f << '\n';
      return 0;
    }
    if (fetch_cmd->parsed()) return tools::fetch_a9a(fetch);
    if (selftest_cmd->parsed()) return cmd_selftest();
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
