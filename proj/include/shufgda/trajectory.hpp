#ifndef SHUFGDA_TRAJECTORY_HPP
#define SHUFGDA_TRAJECTORY_HPP

#include "shufgda/errors.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shufgda {

/// Metric columns a trajectory row may carry, in CSV order.
enum class Column : std::size_t {
  phi,
  grad_phi_norm,
  grad_f_norm,
  grad_f_proj_norm,
  potential_shifted,
  potential_exact,
  B_t,
  lemma3_slack,
  accuracy,
  wall_ms,
  kCount
};

inline constexpr std::size_t kColumnCount = static_cast<std::size_t>(Column::kCount);

inline constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "phi",           "grad_phi_norm",   "grad_f_norm", "grad_f_proj_norm", "potential_shifted",
    "potential_exact", "B_t",           "lemma3_slack", "accuracy",        "wall_ms"};

inline std::string_view column_name(Column c) { return kColumnNames[static_cast<std::size_t>(c)]; }

inline std::optional<Column> column_from_name(std::string_view name) {
  for (std::size_t k = 0; k < kColumnCount; ++k)
    if (kColumnNames[k] == name) return static_cast<Column>(k);
  return std::nullopt;
}

/// One row per iterate (x_t, y_t). Epoch diagnostics (B_t, lemma3_slack) on
/// row t describe the epoch that starts from that iterate.
struct TrajectoryRecord {
  std::int64_t epoch = 0;
  std::int64_t oracle_calls = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::array<std::optional<double>, kColumnCount> values{};

  void set(Column c, double v) { values[static_cast<std::size_t>(c)] = v; }
  std::optional<double> get(Column c) const { return values[static_cast<std::size_t>(c)]; }
  double at(Column c) const {
    const auto v = get(c);
    if (!v) throw InvalidArgument("record has no value for column " + std::string(column_name(c)));
    return *v;
  }
};

}  // namespace shufgda

#endif  // SHUFGDA_TRAJECTORY_HPP
