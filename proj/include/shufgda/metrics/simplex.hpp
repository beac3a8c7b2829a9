#ifndef SHUFGDA_METRICS_SIMPLEX_HPP
#define SHUFGDA_METRICS_SIMPLEX_HPP

#include "shufgda/errors.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace shufgda::metrics {

/// Euclidean projection onto {y >= 0, sum y = 1} by sort-and-threshold:
/// with v sorted descending, rho = max{k : v_(k) - (sum_{j<=k} v_(j) - 1)/k > 0},
/// tau = (sum_{j<=rho} v_(j) - 1)/rho, output max(v - tau, 0).
inline Vector simplex_project(const Vector& v) {
  const Index n = v.size();
  if (n == 0) throw InvalidArgument("projection onto an empty simplex");
  if (!v.allFinite()) throw NumericFailure("simplex projection of a non-finite vector");

  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  double cumsum = 0.0;
  double tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).max(0.0).matrix();
}

/// Same projection by Michelot's fixed-point scan: tau = (sum(A) - 1)/|A|
/// over the active set A, drop entries <= tau, repeat until A is stable.
/// Each pass is a vectorisable sum and filter; used on hot paths and agrees
/// with simplex_project up to rounding.
inline void simplex_project_inplace(Vector& v) {
  const Index n = v.size();
  if (n == 0) throw InvalidArgument("projection onto an empty simplex");
  double tau = (v.sum() - 1.0) / static_cast<double>(n);
  if (!std::isfinite(tau)) throw NumericFailure("simplex projection of a non-finite vector");

  thread_local std::vector<double> active;
  active.clear();
  double sum = 0.0;
  for (Index i = 0; i < n; ++i)
    if (v(i) > tau) {
      active.push_back(v(i));
      sum += v(i);
    }
  if (active.size() < static_cast<std::size_t>(n)) {
    std::size_t before = 0;
    do {
      before = active.size();
      tau = (sum - 1.0) / static_cast<double>(before);
      std::size_t kept = 0;
      sum = 0.0;
      for (std::size_t k = 0; k < before; ++k)
        if (active[k] > tau) {
          sum += active[k];
          active[kept++] = active[k];
        }
      active.resize(kept);
    } while (active.size() < before);
  }
  v = (v.array() - tau).max(0.0).matrix();
}

/// Distance of v to the simplex constraints: max(|sum - 1|, max(-v_i, 0)).
inline double simplex_violation(const Vector& v) {
  return std::max(std::abs(v.sum() - 1.0), std::max(0.0, -v.minCoeff()));
}

}  // namespace shufgda::metrics

#endif  // SHUFGDA_METRICS_SIMPLEX_HPP
