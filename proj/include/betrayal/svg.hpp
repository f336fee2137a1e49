#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

// Minimal static SVG rendering for the report stage.  Charts are plain
// markup assembled in a fixed order with fixed-precision numbers, so a
// given input always produces identical bytes.
namespace betrayal::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string name;
  std::vector<Point> points;
  // optional absolute error-bar bounds, parallel to points (empty = none)
  std::vector<double> err_low;
  std::vector<double> err_high;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out.push_back(c);
  }
  return out;
}

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> kColors{
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return kColors;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void widen(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

}  // namespace detail

inline std::string line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<Series>& series,
                              int width = 720, int height = 440) {
  const double left = 70, right = 170, top = 45, bottom = 55;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  detail::Range xr, yr;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (!any) {
        xr.lo = xr.hi = s.points[i].x;
        yr.lo = yr.hi = s.points[i].y;
        any = true;
      }
      xr.widen(s.points[i].x);
      yr.widen(s.points[i].y);
      if (i < s.err_low.size()) yr.widen(s.err_low[i]);
      if (i < s.err_high.size()) yr.widen(s.err_high[i]);
    }
  xr.pad();
  yr.pad();

  const auto sx = [&](double x) {
    return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto sy = [&](double y) {
    return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::fmt(left + plot_w / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape(title) + "</text>\n";

  // axes and ticks
  out += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top) +
         "\" x2=\"" + detail::fmt(left) + "\" y2=\"" +
         detail::fmt(top + plot_h) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" +
         detail::fmt(top + plot_h) + "\" x2=\"" + detail::fmt(left + plot_w) +
         "\" y2=\"" + detail::fmt(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    out += "<line x1=\"" + detail::fmt(sx(fx)) + "\" y1=\"" +
           detail::fmt(top + plot_h) + "\" x2=\"" + detail::fmt(sx(fx)) +
           "\" y2=\"" + detail::fmt(top + plot_h + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::fmt(sx(fx)) + "\" y=\"" +
           detail::fmt(top + plot_h + 18) + "\" text-anchor=\"middle\">" +
           detail::fmt(fx) + "</text>\n";
    out += "<line x1=\"" + detail::fmt(left - 5) + "\" y1=\"" +
           detail::fmt(sy(fy)) + "\" x2=\"" + detail::fmt(left) + "\" y2=\"" +
           detail::fmt(sy(fy)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" +
           detail::fmt(sy(fy) + 4) + "\" text-anchor=\"end\">" +
           detail::fmt(fy) + "</text>\n";
  }
  out += "<text x=\"" + detail::fmt(left + plot_w / 2) + "\" y=\"" +
         detail::fmt(top + plot_h + 38) + "\" text-anchor=\"middle\">" +
         detail::escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + detail::fmt(top + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         detail::fmt(top + plot_h / 2) + ")\">" + detail::escape(y_label) +
         "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const auto& color = detail::palette()[si % detail::palette().size()];
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i < s.err_low.size() && i < s.err_high.size()) {
        out += "<line x1=\"" + detail::fmt(sx(s.points[i].x)) + "\" y1=\"" +
               detail::fmt(sy(s.err_low[i])) + "\" x2=\"" +
               detail::fmt(sx(s.points[i].x)) + "\" y2=\"" +
               detail::fmt(sy(s.err_high[i])) + "\" stroke=\"" + color +
               "\" stroke-width=\"1\"/>\n";
      }
    }
    std::string path;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      path += i ? " " : "";
      path += detail::fmt(sx(s.points[i].x)) + "," +
              detail::fmt(sy(s.points[i].y));
    }
    if (!path.empty())
      out += "<polyline points=\"" + path + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"2\"/>\n";
    for (const auto& p : s.points)
      out += "<circle cx=\"" + detail::fmt(sx(p.x)) + "\" cy=\"" +
             detail::fmt(sy(p.y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";

    const double ly = top + 16 + 18 * static_cast<double>(si);
    out += "<line x1=\"" + detail::fmt(left + plot_w + 14) + "\" y1=\"" +
           detail::fmt(ly - 4) + "\" x2=\"" + detail::fmt(left + plot_w + 38) +
           "\" y2=\"" + detail::fmt(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + detail::fmt(left + plot_w + 44) + "\" y=\"" +
           detail::fmt(ly) + "\">" + detail::escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

// Horizontal bar chart for signed values such as model coefficients.
inline std::string bar_chart(const std::string& title,
                             const std::vector<std::pair<std::string, double>>&
                                 bars,
                             int width = 720) {
  const double left = 230, right = 80, top = 45, row = 24;
  const int height = static_cast<int>(top + row * bars.size() + 30);
  const double plot_w = width - left - right;

  detail::Range vr;
  vr.lo = vr.hi = 0.0;
  for (const auto& b : bars) vr.widen(b.second);
  vr.pad();

  const auto sx = [&](double v) {
    return left + (v - vr.lo) / (vr.hi - vr.lo) * plot_w;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::fmt(left + plot_w / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape(title) + "</text>\n";
  out += "<line x1=\"" + detail::fmt(sx(0.0)) + "\" y1=\"" + detail::fmt(top) +
         "\" x2=\"" + detail::fmt(sx(0.0)) + "\" y2=\"" +
         detail::fmt(top + row * static_cast<double>(bars.size())) +
         "\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + row * static_cast<double>(i) + 4;
    const double v = bars[i].second;
    const double x0 = std::min(sx(0.0), sx(v));
    const double w = std::fabs(sx(v) - sx(0.0));
    const char* color = v >= 0 ? "#1f77b4" : "#d62728";
    out += "<rect x=\"" + detail::fmt(x0) + "\" y=\"" + detail::fmt(y) +
           "\" width=\"" + detail::fmt(w) + "\" height=\"" +
           detail::fmt(row - 8) + "\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" +
           detail::fmt(y + row - 12) + "\" text-anchor=\"end\">" +
           detail::escape(bars[i].first) + "</text>\n";
    out += "<text x=\"" +
           detail::fmt(v >= 0 ? x0 + w + 6 : x0 - 6) + "\" y=\"" +
           detail::fmt(y + row - 12) + "\" text-anchor=\"" +
           (v >= 0 ? "start" : "end") + "\">" + detail::fmt(v) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace betrayal::svg
