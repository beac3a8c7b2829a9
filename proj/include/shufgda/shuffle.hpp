#ifndef SHUFGDA_SHUFFLE_HPP
#define SHUFGDA_SHUFFLE_HPP

// Sample orderings for the three without-replacement schemes:
//   IG  fixed deterministic order (data order unless a custom order is given)
//   SO  one random permutation drawn from the seed, reused every epoch
//   RR  a fresh random permutation per epoch
//
// Random draws come from std::mt19937_64 seeded with (seed, epoch, stream), so
// the permutation of any epoch is addressable without replaying earlier ones.

#include "shufgda/errors.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace shufgda {

enum class Scheme { IG, SO, RR };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::IG: return "ig";
    case Scheme::SO: return "so";
    case Scheme::RR: return "rr";
  }
  return "?";
}

inline Scheme scheme_from_string(std::string_view s) {
  if (s == "ig" || s == "IG") return Scheme::IG;
  if (s == "so" || s == "SO") return Scheme::SO;
  if (s == "rr" || s == "RR") return Scheme::RR;
  throw InvalidArgument("unknown shuffling scheme '" + std::string(s) + "'");
}

/// Stream tags keep independent consumers of one seed decorrelated.
enum class RngStream : std::uint32_t {
  kShuffleOnce = 1,
  kReshuffle = 2,
  kSgdaSampling = 3,
  kSubsample = 4,
  kSplit = 5,
  kProblem = 6,
  kInit = 7,
};

/// Generator for (seed, epoch, stream). Same triple, same sequence.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t epoch, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

class Permutation {
 public:
  Permutation() = default;

  /// Validates bijectivity on {0, ..., n-1}.
  explicit Permutation(std::vector<Index> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (Index v : order_) {
      if (v < 0 || v >= static_cast<Index>(order_.size()) || seen[static_cast<std::size_t>(v)])
        throw InvalidArgument("sequence is not a permutation of [0, " +
                              std::to_string(order_.size()) + ")");
      seen[static_cast<std::size_t>(v)] = true;
    }
  }

  static Permutation identity(Index n) {
    Permutation p;
    p.order_.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p.order_[static_cast<std::size_t>(i)] = i;
    return p;
  }

  /// Uniform permutation by Fisher-Yates.
  template <typename Rng>
  static Permutation random(Index n, Rng& rng) {
    Permutation p = identity(n);
    for (Index i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(p.order_[static_cast<std::size_t>(i)],
                p.order_[static_cast<std::size_t>(pick(rng))]);
    }
    return p;
  }

  Index size() const noexcept { return static_cast<Index>(order_.size()); }
  Index operator[](Index j) const { return order_[static_cast<std::size_t>(j)]; }
  const std::vector<Index>& order() const noexcept { return order_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Index> order_;
};

struct ShufflingScheme {
  Scheme variant = Scheme::RR;
  std::uint64_t seed = 0;
  /// Optional IG order (e.g. adversarial); data order when absent.
  std::optional<Permutation> ig_order;
};

/// Ordering used in epoch `epoch` for an n-sample problem.
inline Permutation permutation_for_epoch(const ShufflingScheme& scheme, std::int64_t epoch,
                                         Index n) {
  if (n <= 0) throw InvalidArgument("permutation of an empty index set");
  if (epoch < 0) throw InvalidArgument("negative epoch");
  switch (scheme.variant) {
    case Scheme::IG:
      if (scheme.ig_order) {
        if (scheme.ig_order->size() != n)
          throw InvalidArgument("IG order has length " + std::to_string(scheme.ig_order->size()) +
                                ", expected " + std::to_string(n));
        return *scheme.ig_order;
      }
      return Permutation::identity(n);
    case Scheme::SO: {
      auto rng = make_rng(scheme.seed, 0, RngStream::kShuffleOnce);
      return Permutation::random(n, rng);
    }
    case Scheme::RR: {
      auto rng = make_rng(scheme.seed, static_cast<std::uint64_t>(epoch), RngStream::kReshuffle);
      return Permutation::random(n, rng);
    }
  }
  throw InternalError("unreachable shuffling scheme");
}

/// Reads an order file: one 0-based index per line, blank lines ignored.
inline Permutation read_order(std::istream& in, Index n, const std::string& source = "<order>") {
  std::vector<Index> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    try {
      std::size_t used = 0;
      const long long v = std::stoll(line.substr(first, last - first + 1), &used);
      if (used != last - first + 1) throw std::invalid_argument("trailing");
      order.push_back(static_cast<Index>(v));
    } catch (const std::logic_error&) {
      throw ParseError(source, lineno, first + 1, "expected one integer per line");
    }
  }
  if (static_cast<Index>(order.size()) != n)
    throw InvalidArgument(source + ": order has " + std::to_string(order.size()) +
                          " entries, expected " + std::to_string(n));
  return Permutation(std::move(order));
}

inline Permutation read_order_file(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open order file '" + path + "'");
  return read_order(in, n, path);
}

}  // namespace shufgda

#endif  // SHUFGDA_SHUFFLE_HPP
