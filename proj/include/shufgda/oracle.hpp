#ifndef SHUFGDA_ORACLE_HPP
#define SHUFGDA_ORACLE_HPP

// Finite-sum minimax oracle abstraction:
//
//   min_x max_y f(x, y) = (1/n) sum_i f_i(x, y)
//
// A problem type exposes per-sample first-order oracles. Projections, a
// closed-form inner maximiser and a dual-block smoothness constant are
// optional members detected at compile time; a missing projection means the
// identity.

#include "shufgda/errors.hpp"
#include "shufgda/types.hpp"

#include <concepts>
#include <cstdint>
#include <new>
#include <string>

namespace shufgda {

template <typename P>
concept MinimaxProblem = requires(const P& p, Index i, const Vector& x, const Vector& y,
                                  Vector& out) {
  { p.num_samples() } -> std::convertible_to<Index>;
  { p.dim_x() } -> std::convertible_to<Index>;
  { p.dim_y() } -> std::convertible_to<Index>;
  { p.value(x, y) } -> std::convertible_to<double>;
  p.grad_x_i(i, x, y, out);
  p.grad_y_i(i, x, y, out);
  { p.smoothness() } -> std::convertible_to<double>;
  { p.strong_concavity() } -> std::convertible_to<double>;
};

template <typename P>
concept HasProjectX = requires(const P& p, Vector& v) { p.project_x(v); };

template <typename P>
concept HasProjectY = requires(const P& p, Vector& v) { p.project_y(v); };

template <typename P>
concept HasExactDualMax = requires(const P& p, const Vector& x) {
  { p.exact_dual_max(x) } -> std::convertible_to<Vector>;
};

template <typename P>
concept HasDualSmoothness = requires(const P& p) {
  { p.dual_smoothness() } -> std::convertible_to<double>;
};

template <typename P>
concept HasPhiStar = requires(const P& p) {
  { p.phi_star() } -> std::convertible_to<double>;
};

/// True when both blocks are unconstrained, i.e. the setting the convergence
/// theory covers.
template <MinimaxProblem P>
inline constexpr bool is_unconstrained_v = !HasProjectX<P> && !HasProjectY<P>;

template <MinimaxProblem P>
void project_x(const P& p, Vector& v) {
  if constexpr (HasProjectX<P>) p.project_x(v);
}

template <MinimaxProblem P>
void project_y(const P& p, Vector& v) {
  if constexpr (HasProjectY<P>) p.project_y(v);
}

template <MinimaxProblem P>
double dual_smoothness(const P& p) {
  if constexpr (HasDualSmoothness<P>)
    return p.dual_smoothness();
  else
    return p.smoothness();
}

template <MinimaxProblem P>
double condition_number(const P& p) {
  return p.smoothness() / p.strong_concavity();
}

/// Per-run count of per-sample gradient evaluations, one counter per block.
/// Owned by the caller; problems never count.
struct OracleCounter {
  std::int64_t x_calls = 0;
  std::int64_t y_calls = 0;

  /// Joint per-sample gradient evaluations (one call = both blocks of one f_i).
  std::int64_t joint() const noexcept { return x_calls > y_calls ? x_calls : y_calls; }
};

template <MinimaxProblem P>
void counted_grad_x(const P& p, Index i, const Vector& x, const Vector& y, Vector& out,
                    OracleCounter& counter) {
  p.grad_x_i(i, x, y, out);
  ++counter.x_calls;
}

template <MinimaxProblem P>
void counted_grad_y(const P& p, Index i, const Vector& x, const Vector& y, Vector& out,
                    OracleCounter& counter) {
  p.grad_y_i(i, x, y, out);
  ++counter.y_calls;
}

struct FullGradientPair {
  Vector gx;
  Vector gy;
  std::int64_t oracle_calls = 0;
};

/// Per-sample gradients at an epoch anchor, one column per sample.
class AnchorCache {
 public:
  /// Default ceiling on the cache footprint before falling back to recomputation.
  static constexpr std::size_t kDefaultMaxBytes = std::size_t{4} << 30;

  AnchorCache() = default;

  AnchorCache(Index n, Index dim_x, Index dim_y, std::size_t max_bytes = kDefaultMaxBytes) {
    const auto reals = static_cast<std::size_t>(n) * static_cast<std::size_t>(dim_x + dim_y);
    if (reals > max_bytes / sizeof(double))
      throw ResourceExhausted("anchor cache needs " + std::to_string(reals * sizeof(double)) +
                              " bytes, limit is " + std::to_string(max_bytes));
    try {
      gx_.resize(dim_x, n);
      gy_.resize(dim_y, n);
    } catch (const std::bad_alloc&) {
      throw ResourceExhausted("anchor cache allocation failed");
    }
  }

  Index size() const noexcept { return gx_.cols(); }
  bool empty() const noexcept { return gx_.cols() == 0; }

  auto gx(Index i) const { return gx_.col(i); }
  auto gy(Index i) const { return gy_.col(i); }
  auto gx(Index i) { return gx_.col(i); }
  auto gy(Index i) { return gy_.col(i); }

  /// n * (dim_x + dim_y) reals.
  std::size_t footprint_reals() const noexcept {
    return static_cast<std::size_t>(gx_.size() + gy_.size());
  }

 private:
  Matrix gx_;
  Matrix gy_;
};

namespace detail {

template <MinimaxProblem P>
void check_dims(const P& p, const Vector& x, const Vector& y) {
  if (x.size() != p.dim_x() || y.size() != p.dim_y())
    throw InvalidArgument("dimension mismatch: got (" + std::to_string(x.size()) + ", " +
                          std::to_string(y.size()) + "), problem expects (" +
                          std::to_string(p.dim_x()) + ", " + std::to_string(p.dim_y()) + ")");
}

// Accumulates in index order 0..n-1 then divides by n, optionally storing each
// per-sample gradient.
template <MinimaxProblem P>
FullGradientPair full_gradient_impl(const P& p, const Vector& x, const Vector& y,
                                    AnchorCache* cache) {
  check_dims(p, x, y);
  const Index n = p.num_samples();
  FullGradientPair out{Vector::Zero(p.dim_x()), Vector::Zero(p.dim_y()), 0};
  Vector gx(p.dim_x());
  Vector gy(p.dim_y());
  for (Index i = 0; i < n; ++i) {
    p.grad_x_i(i, x, y, gx);
    p.grad_y_i(i, x, y, gy);
    if (!gx.allFinite() || !gy.allFinite())
      throw NumericFailure("non-finite per-sample gradient", {.sample = i});
    out.gx += gx;
    out.gy += gy;
    if (cache != nullptr) {
      cache->gx(i) = gx;
      cache->gy(i) = gy;
    }
  }
  out.gx /= static_cast<double>(n);
  out.gy /= static_cast<double>(n);
  out.oracle_calls = n;
  return out;
}

}  // namespace detail

/// Averaged gradients of f at (x, y). Consumes exactly n per-sample evaluations.
template <MinimaxProblem P>
FullGradientPair full_gradient(const P& p, const Vector& x, const Vector& y) {
  return detail::full_gradient_impl(p, x, y, nullptr);
}

/// Same as full_gradient, additionally memoising every per-sample gradient into
/// `cache` (which must be sized for the problem). No extra oracle calls.
template <MinimaxProblem P>
FullGradientPair full_gradient(const P& p, const Vector& x, const Vector& y,
                               AnchorCache& cache) {
  if (cache.size() != p.num_samples())
    throw InvalidArgument("anchor cache sized for a different problem");
  return detail::full_gradient_impl(p, x, y, &cache);
}

/// Standalone cache construction at an anchor (n per-sample evaluations).
template <MinimaxProblem P>
AnchorCache per_sample_gradient_cache(const P& p, const Vector& x_anchor,
                                      const Vector& y_anchor,
                                      std::size_t max_bytes = AnchorCache::kDefaultMaxBytes) {
  if (!x_anchor.allFinite() || !y_anchor.allFinite())
    throw InvalidArgument("anchor is not finite");
  AnchorCache cache(p.num_samples(), p.dim_x(), p.dim_y(), max_bytes);
  detail::full_gradient_impl(p, x_anchor, y_anchor, &cache);
  return cache;
}

}  // namespace shufgda

#endif  // SHUFGDA_ORACLE_HPP
