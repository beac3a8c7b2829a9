#ifndef SHUFGDA_HARNESS_CONFIG_HPP
#define SHUFGDA_HARNESS_CONFIG_HPP

// Experiment configuration and its text form: a sectioned `key = value` file
// (a TOML-compatible subset without quoting). Lists are comma separated;
// seeds also accept inclusive ranges "1..5". Lines starting with '#' are
// comments. to_text() followed by parse_config() reproduces the config exactly.

#include "shufgda/errors.hpp"
#include "shufgda/harness/text.hpp"
#include "shufgda/optim.hpp"
#include "shufgda/trajectory.hpp"
#include "shufgda/types.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace shufgda::harness {

struct QuadraticParams {
  Index dim_x = 10;
  Index dim_y = 10;
  Index n = 50;
  double kappa = 10.0;
  bool operator==(const QuadraticParams&) const = default;
};

struct DroParams {
  /// libsvm file; empty selects the synthetic a9a-like surrogate.
  std::string data;
  /// Rows kept after subsampling; 0 keeps all.
  Index subsample = 0;
  Index synthetic_n = 2000;
  Index synthetic_dim = 123;
  Index synthetic_active = 14;
  /// Absent means 1/n^2.
  std::optional<double> lambda1;
  double lambda2 = 0.001;
  double alpha = 10.0;
  bool operator==(const DroParams&) const = default;
};

struct PoisonParams {
  Index n = 1000;
  Index d = 100;
  double epsilon = 2.0;
  double poison_ratio = 0.1;
  double train_fraction = 0.7;
  double noise_variance = 1e-3;
  double theta_radius = 10.0;
  bool operator==(const PoisonParams&) const = default;
};

struct ExperimentConfig {
  // [problem]
  std::string problem = "quadratic";
  /// Instance seed; when absent each run seed also seeds its instance.
  std::optional<std::uint64_t> problem_seed;
  QuadraticParams quadratic;
  DroParams dro;
  PoisonParams poison;

  // [optimizer]
  std::vector<std::string> algorithms{"vr-rr"};
  double eta1 = 1e-3;
  double eta2 = 1e-2;
  bool theorem1_steps = false;
  double eta2_fraction = 1.0;
  double r_multiplier = 1.0;
  /// Executed epochs.
  std::int64_t epochs = 200;
  /// Per-sample gradient budget; replaces `epochs` when set.
  std::optional<std::int64_t> budget;
  Index batch_size = 1;
  bool cache_anchors = false;
  std::string coupling = "jacobi";
  bool enforce_theory = false;
  std::string ig_order;
  /// Per-algorithm step sizes, "algo=eta1:eta2,..."; others use eta1/eta2.
  std::string steps;

  // [grid]
  std::vector<double> eta1_grid{0.1, 0.01, 0.001};
  std::vector<double> eta2_grid{0.1, 0.01, 0.001};
  /// Metric minimised when picking a grid cell; empty selects the problem default.
  std::string objective;
  /// compare: pick each algorithm's step sizes by a grid search first.
  bool tune = false;

  // [run]
  std::vector<std::uint64_t> seeds{1};
  std::string output = "out";
  /// Metrics are evaluated every `cadence` epochs (and always at both ends).
  std::int64_t cadence = 1;
  bool wall_time = false;
  double lambda = 4.0;
  double inner_tol = 1e-8;
  bool plot = false;
  bool log_y = true;
  int jobs = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

struct StepOverride {
  std::string algorithm;
  double eta1;
  double eta2;
};

/// Parses the `steps` key.
inline std::vector<StepOverride> step_overrides(const ExperimentConfig& c) {
  std::vector<StepOverride> out;
  for (const auto& item : split(c.steps, ',')) {
    const auto eq = item.find('=');
    const auto colon = item.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw InvalidArgument("step override '" + item + "' is not algo=eta1:eta2");
    const auto e1 = to_double(item.substr(eq + 1, colon - eq - 1));
    const auto e2 = to_double(item.substr(colon + 1));
    if (!e1 || !e2) throw InvalidArgument("step override '" + item + "' has a bad number");
    out.push_back({item.substr(0, eq), *e1, *e2});
  }
  return out;
}

inline void validate(const ExperimentConfig& c) {
  if (c.problem != "quadratic" && c.problem != "dro-logistic" && c.problem != "poison-logistic")
    throw InvalidArgument("unknown problem '" + c.problem +
                          "' (expected quadratic | dro-logistic | poison-logistic)");
  if (c.algorithms.empty()) throw InvalidArgument("at least one algorithm is required");
  for (const auto& a : c.algorithms) {
    OptimizerConfig probe;
    apply_algorithm_id(a, probe);
  }
  if (c.seeds.empty()) throw InvalidArgument("at least one seed is required");
  if (c.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (c.budget && *c.budget < 1) throw InvalidArgument("budget must be positive");
  if (c.cadence < 1) throw InvalidArgument("cadence must be >= 1");
  if (c.coupling != "jacobi" && c.coupling != "gauss-seidel")
    throw InvalidArgument("coupling must be jacobi or gauss-seidel");
  if (!(c.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (!(c.inner_tol > 0.0)) throw InvalidArgument("inner_tol must be positive");
  if (c.jobs < 1) throw InvalidArgument("jobs must be >= 1");
  if (c.eta1_grid.empty() || c.eta2_grid.empty()) throw InvalidArgument("empty step-size grid");
  if (!c.objective.empty() && !column_from_name(c.objective))
    throw InvalidArgument("unknown objective metric '" + c.objective + "'");
  (void)step_overrides(c);
}

namespace detail {

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

// One binding per key: how to print it and how to assign it from text.
struct Binding {
  std::string section;
  std::string key;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("not a boolean: '" + v + "'");
}

inline double parse_real(const std::string& v) {
  const auto d = to_double(v);
  if (!d) throw InvalidArgument("not a number: '" + v + "'");
  return *d;
}

template <typename Int>
Int parse_int(const std::string& v) {
  const auto d = to_integer<Int>(v);
  if (!d) throw InvalidArgument("not an integer: '" + v + "'");
  return *d;
}

#define SHUFGDA_REAL(sec, name, field)                                                  \
  Binding {                                                                             \
    sec, name, [](const ExperimentConfig& c) -> std::optional<std::string> {            \
      return format_double(c.field);                                                    \
    },                                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_real(v); }      \
  }
#define SHUFGDA_INT(sec, name, field, type)                                             \
  Binding {                                                                             \
    sec, name, [](const ExperimentConfig& c) -> std::optional<std::string> {            \
      return std::to_string(c.field);                                                   \
    },                                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_int<type>(v); } \
  }
#define SHUFGDA_BOOL(sec, name, field)                                                  \
  Binding {                                                                             \
    sec, name, [](const ExperimentConfig& c) -> std::optional<std::string> {            \
      return bool_text(c.field);                                                        \
    },                                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(v); }      \
  }
#define SHUFGDA_STR(sec, name, field)                                                   \
  Binding {                                                                             \
    sec, name, [](const ExperimentConfig& c) -> std::optional<std::string> {            \
      return c.field;                                                                   \
    },                                                                                  \
        [](ExperimentConfig& c, const std::string& v) { c.field = v; }                  \
  }

inline const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      SHUFGDA_STR("problem", "name", problem),
      Binding{"problem", "seed",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                if (!c.problem_seed) return std::nullopt;
                return std::to_string(*c.problem_seed);
              },
              [](ExperimentConfig& c, const std::string& v) {
                c.problem_seed = parse_int<std::uint64_t>(v);
              }},

      SHUFGDA_INT("quadratic", "dim_x", quadratic.dim_x, Index),
      SHUFGDA_INT("quadratic", "dim_y", quadratic.dim_y, Index),
      SHUFGDA_INT("quadratic", "n", quadratic.n, Index),
      SHUFGDA_REAL("quadratic", "kappa", quadratic.kappa),

      SHUFGDA_STR("dro", "data", dro.data),
      SHUFGDA_INT("dro", "subsample", dro.subsample, Index),
      SHUFGDA_INT("dro", "synthetic_n", dro.synthetic_n, Index),
      SHUFGDA_INT("dro", "synthetic_dim", dro.synthetic_dim, Index),
      SHUFGDA_INT("dro", "synthetic_active", dro.synthetic_active, Index),
      Binding{"dro", "lambda1",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                if (!c.dro.lambda1) return std::nullopt;
                return format_double(*c.dro.lambda1);
              },
              [](ExperimentConfig& c, const std::string& v) { c.dro.lambda1 = parse_real(v); }},
      SHUFGDA_REAL("dro", "lambda2", dro.lambda2),
      SHUFGDA_REAL("dro", "alpha", dro.alpha),

      SHUFGDA_INT("poison", "n", poison.n, Index),
      SHUFGDA_INT("poison", "d", poison.d, Index),
      SHUFGDA_REAL("poison", "epsilon", poison.epsilon),
      SHUFGDA_REAL("poison", "poison_ratio", poison.poison_ratio),
      SHUFGDA_REAL("poison", "train_fraction", poison.train_fraction),
      SHUFGDA_REAL("poison", "noise_variance", poison.noise_variance),
      SHUFGDA_REAL("poison", "theta_radius", poison.theta_radius),

      Binding{"optimizer", "algorithms",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                return join(c.algorithms);
              },
              [](ExperimentConfig& c, const std::string& v) { c.algorithms = split(v, ','); }},
      SHUFGDA_REAL("optimizer", "eta1", eta1),
      SHUFGDA_REAL("optimizer", "eta2", eta2),
      SHUFGDA_BOOL("optimizer", "theorem1_steps", theorem1_steps),
      SHUFGDA_REAL("optimizer", "eta2_fraction", eta2_fraction),
      SHUFGDA_REAL("optimizer", "r_multiplier", r_multiplier),
      SHUFGDA_INT("optimizer", "epochs", epochs, std::int64_t),
      Binding{"optimizer", "budget",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                if (!c.budget) return std::nullopt;
                return std::to_string(*c.budget);
              },
              [](ExperimentConfig& c, const std::string& v) {
                c.budget = parse_int<std::int64_t>(v);
              }},
      SHUFGDA_INT("optimizer", "batch_size", batch_size, Index),
      SHUFGDA_BOOL("optimizer", "cache_anchors", cache_anchors),
      SHUFGDA_STR("optimizer", "coupling", coupling),
      SHUFGDA_BOOL("optimizer", "enforce_theory", enforce_theory),
      SHUFGDA_STR("optimizer", "ig_order", ig_order),
      SHUFGDA_STR("optimizer", "steps", steps),

      Binding{"grid", "eta1",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                return join_doubles(c.eta1_grid);
              },
              [](ExperimentConfig& c, const std::string& v) { c.eta1_grid = parse_double_list(v); }},
      Binding{"grid", "eta2",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                return join_doubles(c.eta2_grid);
              },
              [](ExperimentConfig& c, const std::string& v) { c.eta2_grid = parse_double_list(v); }},
      SHUFGDA_STR("grid", "objective", objective),
      SHUFGDA_BOOL("grid", "tune", tune),

      Binding{"run", "seeds",
              [](const ExperimentConfig& c) -> std::optional<std::string> {
                return join_seeds(c.seeds);
              },
              [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); }},
      SHUFGDA_STR("run", "output", output),
      SHUFGDA_INT("run", "cadence", cadence, std::int64_t),
      SHUFGDA_BOOL("run", "wall_time", wall_time),
      SHUFGDA_REAL("run", "lambda", lambda),
      SHUFGDA_REAL("run", "inner_tol", inner_tol),
      SHUFGDA_BOOL("run", "plot", plot),
      SHUFGDA_BOOL("run", "log_y", log_y),
      SHUFGDA_INT("run", "jobs", jobs, int),
  };
  return table;
}

#undef SHUFGDA_REAL
#undef SHUFGDA_INT
#undef SHUFGDA_BOOL
#undef SHUFGDA_STR

}  // namespace detail

/// Text form. Optional keys that are unset are omitted.
inline std::string to_text(const ExperimentConfig& c) {
  std::string out;
  std::string section;
  for (const auto& b : detail::bindings()) {
    if (b.section != section) {
      if (!section.empty()) out += '\n';
      section = b.section;
      out += '[' + section + "]\n";
    }
    if (const auto v = b.get(c)) out += b.key + " = " + *v + '\n';
  }
  return out;
}

/// Assigns one `section.key` from text; throws InvalidArgument on unknown keys.
inline void set_option(ExperimentConfig& c, const std::string& section, const std::string& key,
                       const std::string& value) {
  for (const auto& b : detail::bindings())
    if (b.section == section && b.key == key) {
      b.set(c, value);
      return;
    }
  throw InvalidArgument("unknown key '" + key + "' in section [" + section + "]");
}

/// Overrides `base` with the keys present in `text`.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {},
                                     const std::string& source = "<config>") {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::string section;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t col = line.find_first_not_of(" \t") + 1;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3)
        throw ParseError(source, line_no, col, "malformed section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, col, "expected key = value");
    if (section.empty()) throw ParseError(source, line_no, col, "key outside any section");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    const auto& all = detail::bindings();
    if (std::none_of(all.begin(), all.end(),
                     [&](const auto& b) { return b.section == section && b.key == key; }))
      throw ParseError(source, line_no, col,
                       "unknown key '" + key + "' in section [" + section + "]");
    const std::size_t value_col = line.find_first_not_of(" \t", col - 1 + eq + 1);
    try {
      set_option(base, section, key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_no, value_col == std::string::npos ? line.size() + 1 : value_col + 1,
                       e.what());
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base), path);
}

/// Optimizer settings for one algorithm id (step sizes filled in by the caller
/// when the theorem rule is requested).
inline OptimizerConfig optimizer_config(const ExperimentConfig& c, const std::string& algo,
                                        std::uint64_t seed) {
  OptimizerConfig o;
  apply_algorithm_id(algo, o);
  o.eta1 = c.eta1;
  o.eta2 = c.eta2;
  for (const auto& s : step_overrides(c))
    if (s.algorithm == algo) {
      o.eta1 = s.eta1;
      o.eta2 = s.eta2;
    }
  o.epochs = c.epochs - 1;
  o.batch_size = c.batch_size;
  o.seed = seed;
  o.scheme.seed = seed;
  o.cache_anchors = o.cache_anchors || (c.cache_anchors && o.algorithm == Algorithm::VrShuffle);
  o.enforce_theory = c.enforce_theory;
  o.coupling = c.coupling == "gauss-seidel" ? Coupling::GaussSeidel : Coupling::Jacobi;
  return o;
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_CONFIG_HPP
