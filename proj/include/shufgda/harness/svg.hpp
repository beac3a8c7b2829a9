#ifndef SHUFGDA_HARNESS_SVG_HPP
#define SHUFGDA_HARNESS_SVG_HPP

// Static line plots as standalone SVG. Output depends only on the inputs, so
// identical data renders to identical bytes.

#include "shufgda/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace shufgda::harness {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label = "epoch";
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace detail

inline std::string render_svg(const std::vector<Series>& series, const PlotStyle& style = {}) {
  if (series.empty()) throw InvalidArgument("nothing to plot: no series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("series '" + s.name + "' has x/y length mismatch");
    if (s.x.empty()) throw InvalidArgument("series '" + s.name + "' is empty");
  }

  // Log-scale floor: smallest positive finite value; non-positive values are
  // drawn at the floor and reported.
  double floor_y = std::numeric_limits<double>::infinity();
  std::size_t clamped = 0;
  if (style.log_y) {
    for (const auto& s : series)
      for (double v : s.y)
        if (std::isfinite(v) && v > 0.0) floor_y = std::min(floor_y, v);
    if (!std::isfinite(floor_y)) floor_y = 1.0;
  }
  auto transform = [&](double v) {
    if (!style.log_y) return v;
    return std::log10(v > 0.0 ? v : floor_y);
  };

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (style.log_y && s.y[k] <= 0.0) ++clamped;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      const double ty = transform(s.y[k]);
      y_lo = std::min(y_lo, ty);
      y_hi = std::max(y_hi, ty);
    }
  if (!std::isfinite(x_lo)) throw InvalidArgument("nothing to plot: no finite points");
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    const double pad = style.log_y ? 0.5 : std::max(1.0, std::abs(y_lo) * 0.1);
    y_lo -= pad;
    y_hi += pad;
  }
  if (style.log_y) {
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(y_hi);
  }

  const double W = style.width, H = style.height;
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double ty) { return top + ph - (ty - y_lo) / (y_hi - y_lo) * ph; };
  using detail::fmt;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
         "\" height=\"" + std::to_string(style.height) + "\" viewBox=\"0 0 " +
         std::to_string(style.width) + ' ' + std::to_string(style.height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty())
    out += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           detail::xml_escape(style.title) + "</text>\n";

  // Axes and ticks.
  out += "<g stroke=\"black\" fill=\"none\">\n";
  out += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" +
         fmt("%.1f", pw) + "\" height=\"" + fmt("%.1f", ph) + "\"/>\n";
  out += "</g>\n<g font-size=\"11\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 5.0;
    const double X = px(xv);
    out += "<line x1=\"" + fmt("%.1f", X) + "\" y1=\"" + fmt("%.1f", top + ph) + "\" x2=\"" +
           fmt("%.1f", X) + "\" y2=\"" + fmt("%.1f", top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.1f", X) + "\" y=\"" + fmt("%.1f", top + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt("%.4g", xv) + "</text>\n";
  }
  const int y_ticks = style.log_y ? static_cast<int>(y_hi - y_lo) : 5;
  for (int k = 0; k <= y_ticks; ++k) {
    const double tv = y_lo + (y_hi - y_lo) * k / std::max(1, y_ticks);
    const double Y = py(tv);
    const std::string label = style.log_y ? "1e" + fmt("%.0f", tv) : fmt("%.4g", tv);
    out += "<line x1=\"" + fmt("%.1f", left - 5) + "\" y1=\"" + fmt("%.1f", Y) + "\" x2=\"" +
           fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", Y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", Y + 4) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  out += "</g>\n";
  out += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", H - 18) +
         "\" text-anchor=\"middle\">" + detail::xml_escape(style.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + fmt("%.1f", top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::xml_escape(style.y_label + (style.log_y ? " (log scale)" : "")) + "</text>\n";

  // Series.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = detail::kPalette[s % detail::kPalette.size()];
    std::string pts;
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      const double xv = series[s].x[k], yv = series[s].y[k];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(xv)) + ',' + fmt("%.2f", py(transform(yv)));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + fmt("%.1f", left + pw + 12) + "\" y1=\"" + fmt("%.1f", ly - 4) +
           "\" x2=\"" + fmt("%.1f", left + pw + 36) + "\" y2=\"" + fmt("%.1f", ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt("%.1f", left + pw + 42) + "\" y=\"" + fmt("%.1f", ly) + "\">" +
           detail::xml_escape(series[s].name) + "</text>\n";
  }

  if (clamped > 0)
    out += "<text class=\"warning\" x=\"" + fmt("%.1f", left + 6) + "\" y=\"" +
           fmt("%.1f", top + ph - 6) + "\" fill=\"#b00\">warning: " + std::to_string(clamped) +
           " non-positive value(s) clamped to plot floor</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_SVG_HPP
