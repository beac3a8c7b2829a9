#ifndef SHUFGDA_DATA_HPP
#define SHUFGDA_DATA_HPP

// Dense datasets: libsvm text ingestion, synthetic generators and splitting.
//
// libsvm grammar (one sample per line):
//   line  := label ( WS index ':' value )* [WS]
//   label := one of -1, +1, 1, 0 (any float spelling of those values)
//   index := positive integer, strictly increasing within the line (1-based)
// Blank lines are skipped. Missing indices are zero. Label 0 maps to -1.

#include "shufgda/errors.hpp"
#include "shufgda/shuffle.hpp"
#include "shufgda/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace shufgda {

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

struct DatasetMatrix {
  RowMatrix features;  // n x d
  Vector labels;       // entries in {-1, +1}
  std::optional<Split> split;

  Index n() const noexcept { return features.rows(); }
  Index d() const noexcept { return features.cols(); }

  /// Labels mapped to {0, 1}.
  Vector labels01() const { return ((labels.array() + 1.0) * 0.5).matrix(); }

  /// Row subset in the given order (split dropped).
  DatasetMatrix rows(const std::vector<Index>& idx) const {
    DatasetMatrix out;
    out.features.resize(static_cast<Index>(idx.size()), d());
    out.labels.resize(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Index i = idx[k];
      if (i < 0 || i >= n()) throw InvalidArgument("row index out of range");
      out.features.row(static_cast<Index>(k)) = features.row(i);
      out.labels(static_cast<Index>(k)) = labels(i);
    }
    return out;
  }

  DatasetMatrix train_rows() const {
    if (!split) throw InvalidArgument("dataset has no split");
    return rows(split->train);
  }
  DatasetMatrix test_rows() const {
    if (!split) throw InvalidArgument("dataset has no split");
    return rows(split->test);
  }

  void validate() const {
    if (labels.size() != n()) throw InvalidArgument("label count does not match row count");
    if (!features.allFinite()) throw InvalidArgument("features contain NaN or Inf");
    for (Index i = 0; i < n(); ++i)
      if (labels(i) != 1.0 && labels(i) != -1.0)
        throw InvalidArgument("label at row " + std::to_string(i) + " is not in {-1, +1}");
    if (split) {
      std::vector<bool> seen(static_cast<std::size_t>(n()), false);
      std::size_t count = 0;
      for (const auto* part : {&split->train, &split->test})
        for (Index i : *part) {
          if (i < 0 || i >= n() || seen[static_cast<std::size_t>(i)])
            throw InvalidArgument("split is not a partition of the rows");
          seen[static_cast<std::size_t>(i)] = true;
          ++count;
        }
      if (count != static_cast<std::size_t>(n()))
        throw InvalidArgument("split does not cover every row");
    }
  }
};

inline bool operator==(const DatasetMatrix& a, const DatasetMatrix& b) {
  return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         a.features == b.features && a.labels == b.labels;
}

// ---------------------------------------------------------------------------
// libsvm
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_blank(char c) { return c == ' ' || c == '\t'; }

// Parses a finite double occupying exactly `tok`. A leading '+' is accepted.
inline std::optional<double> parse_double(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty() || tok.front() == '+') return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

}  // namespace detail

/// Dense storage caps the feature dimension.
inline constexpr long long kMaxLibsvmIndex = 1LL << 20;

/// Parses libsvm text. Errors carry 1-based line and column.
inline DatasetMatrix parse_libsvm(std::istream& in, std::optional<Index> expected_dim = {},
                                  const std::string& source = "<libsvm>") {
  struct Entry {
    Index row;
    Index col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  Index max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t pos = 0;
    auto skip_blanks = [&] {
      while (pos < line.size() && detail::is_blank(line[pos])) ++pos;
    };
    auto next_token = [&]() -> std::string_view {
      const std::size_t start = pos;
      while (pos < line.size() && !detail::is_blank(line[pos])) ++pos;
      return std::string_view(line).substr(start, pos - start);
    };

    skip_blanks();
    if (pos == line.size()) continue;

    const std::size_t label_col = pos + 1;
    const std::string_view label_tok = next_token();
    const auto label = detail::parse_double(label_tok);
    if (!label) throw ParseError(source, lineno, label_col, "malformed label '" +
                                                                std::string(label_tok) + "'");
    if (*label != 1.0 && *label != -1.0 && *label != 0.0)
      throw ParseError(source, lineno, label_col,
                       "label '" + std::string(label_tok) + "' is not one of -1, +1, 0, 1");
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(*label == 0.0 ? -1.0 : *label);

    Index last_index = 0;
    for (;;) {
      skip_blanks();
      if (pos == line.size()) break;
      const std::size_t col = pos + 1;
      const std::string_view tok = next_token();
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0)
        throw ParseError(source, lineno, col, "expected index:value, got '" + std::string(tok) + "'");

      long long idx = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size())
        throw ParseError(source, lineno, col, "malformed feature index '" + std::string(idx_tok) + "'");
      if (idx < 1) throw ParseError(source, lineno, col, "feature index must be >= 1");
      if (idx > kMaxLibsvmIndex)
        throw ParseError(source, lineno, col, "feature index exceeds " + std::to_string(kMaxLibsvmIndex));
      if (idx <= last_index)
        throw ParseError(source, lineno, col,
                         "feature indices must be strictly increasing (" + std::to_string(idx) +
                             " after " + std::to_string(last_index) + ")");

      const auto value = detail::parse_double(tok.substr(colon + 1));
      if (!value)
        throw ParseError(source, lineno, col + colon + 1,
                         "malformed feature value '" + std::string(tok.substr(colon + 1)) + "'");
      last_index = static_cast<Index>(idx);
      max_index = std::max(max_index, last_index);
      entries.push_back({row, last_index - 1, *value});
    }
  }
  if (in.bad()) throw Error(source + ": read failure");
  if (labels.empty()) throw ParseError(source, lineno, 0, "no samples");

  const Index dim = std::max(max_index, expected_dim.value_or(0));
  DatasetMatrix ds;
  ds.features = RowMatrix::Zero(static_cast<Index>(labels.size()), dim);
  ds.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  for (const auto& e : entries) ds.features(e.row, e.col) = e.value;
  return ds;
}

inline DatasetMatrix parse_libsvm_file(const std::string& path,
                                       std::optional<Index> expected_dim = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return parse_libsvm(in, expected_dim, path);
}

/// Nonzero entries only; shortest round-trip float spelling.
inline void write_libsvm(const DatasetMatrix& ds, std::ostream& out) {
  char buf[64];
  for (Index i = 0; i < ds.n(); ++i) {
    out << (ds.labels(i) > 0 ? "+1" : "-1");
    for (Index j = 0; j < ds.d(); ++j) {
      const double v = ds.features(i, j);
      if (v == 0.0) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << (j + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sampling and splitting
// ---------------------------------------------------------------------------

/// m rows drawn without replacement, in draw order.
inline DatasetMatrix subsample(const DatasetMatrix& ds, Index m, std::uint64_t seed) {
  if (m < 1 || m > ds.n())
    throw InvalidArgument("subsample size " + std::to_string(m) + " outside [1, " +
                          std::to_string(ds.n()) + "]");
  auto rng = make_rng(seed, 0, RngStream::kSubsample);
  const auto perm = Permutation::random(ds.n(), rng);
  std::vector<Index> idx(perm.order().begin(), perm.order().begin() + m);
  return ds.rows(idx);
}

/// floor(fraction * n) training rows, the rest test.
inline DatasetMatrix train_test_split(const DatasetMatrix& ds, double train_fraction,
                                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0, 1)");
  const Index n_train =
      static_cast<Index>(std::floor(train_fraction * static_cast<double>(ds.n())));
  if (n_train < 1 || n_train >= ds.n())
    throw InvalidArgument("split leaves an empty side");
  auto rng = make_rng(seed, 0, RngStream::kSplit);
  const auto perm = Permutation::random(ds.n(), rng);
  DatasetMatrix out = ds;
  Split s;
  s.train.assign(perm.order().begin(), perm.order().begin() + n_train);
  s.test.assign(perm.order().begin() + n_train, perm.order().end());
  out.split = std::move(s);
  return out;
}

/// Binary bag-of-indicators data in the style of a9a: each row switches on
/// `active` of `d` features; labels come from a planted linear score, with
/// roughly a quarter positive.
inline DatasetMatrix make_sparse_binary(Index n, Index d, Index active, std::uint64_t seed) {
  if (n < 1 || d < 1 || active < 1 || active > d)
    throw InvalidArgument("invalid sparse-binary dataset shape");
  auto rng = make_rng(seed, 0, RngStream::kProblem);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector w(d);
  for (Index j = 0; j < d; ++j) w(j) = gauss(rng);

  DatasetMatrix ds;
  ds.features = RowMatrix::Zero(n, d);
  ds.labels.resize(n);
  std::vector<Index> cols(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) cols[static_cast<std::size_t>(j)] = j;
  const double scale = 1.0 / std::sqrt(static_cast<double>(active));
  for (Index i = 0; i < n; ++i) {
    // partial Fisher-Yates: the first `active` slots are a uniform subset
    for (Index k = 0; k < active; ++k) {
      std::uniform_int_distribution<Index> pick(k, d - 1);
      std::swap(cols[static_cast<std::size_t>(k)], cols[static_cast<std::size_t>(pick(rng))]);
      ds.features(i, cols[static_cast<std::size_t>(k)]) = 1.0;
    }
    const double score = scale * ds.features.row(i).dot(w) + 0.5 * gauss(rng);
    ds.labels(i) = score > 0.7 ? 1.0 : -1.0;
  }
  return ds;
}

}  // namespace shufgda

#endif  // SHUFGDA_DATA_HPP
