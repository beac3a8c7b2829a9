#ifndef SHUFGDA_HARNESS_TEXT_HPP
#define SHUFGDA_HARNESS_TEXT_HPP

// Locale-independent number formatting and list parsing shared by the config
// reader and the CSV writer.

#include "shufgda/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace shufgda::harness {

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed 17 significant digits (round-trip exact, stable width per value).
inline std::string format_double17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> to_integer(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    const auto v = to_double(tok);
    if (!v) throw InvalidArgument("not a number: '" + tok + "'");
    out.push_back(*v);
  }
  return out;
}

/// "1,2,7" or "1..5" (inclusive) or a mix such as "1..3,10".
inline std::vector<std::uint64_t> parse_seed_list(std::string_view s) {
  std::vector<std::uint64_t> out;
  for (const auto& tok : split(s, ',')) {
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      const auto v = to_integer<std::uint64_t>(tok);
      if (!v) throw InvalidArgument("not a seed: '" + tok + "'");
      out.push_back(*v);
      continue;
    }
    const auto lo = to_integer<std::uint64_t>(std::string_view(tok).substr(0, dots));
    const auto hi = to_integer<std::uint64_t>(std::string_view(tok).substr(dots + 2));
    if (!lo || !hi || *hi < *lo) throw InvalidArgument("bad seed range: '" + tok + "'");
    if (*hi - *lo > 1000000) throw InvalidArgument("seed range too large: '" + tok + "'");
    for (std::uint64_t v = *lo; v <= *hi; ++v) out.push_back(v);
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += format_double(v[k]);
  }
  return s;
}

inline std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(v[k]);
  }
  return s;
}

inline std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += sep;
    s += v[k];
  }
  return s;
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_TEXT_HPP
