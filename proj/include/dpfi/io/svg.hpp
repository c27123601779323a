#pragma once

/**
 * @file
 * @brief Minimal SVG charts: line plots and histograms with axes, ticks and
 * a legend.  Output is plain text and deterministic.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace dpfi::io {

struct Series
{
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartStyle
{
  int width = 720;
  int height = 440;
  int margin_left = 80;
  int margin_right = 150;
  int margin_top = 40;
  int margin_bottom = 60;
};

namespace detail {

inline std::string fmt_num(double v)
{
  char buf[32];
  if (v == 0.0) { return "0"; }
  const double a = std::abs(v);
  if (a >= 1e6 || a < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

inline std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// "Nice" tick positions covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
  // flat or nearly flat data: widen so the step stays well above rounding
  if (!(hi - lo > 1e-9 * std::max(std::abs(lo), std::abs(hi)))) {
    const double pad = std::max(1.0, std::abs(lo) * 0.05);
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double step = (f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> t;
  const double first = std::floor(lo / step) * step;
  for (int k = 0; k <= 4 * target; ++k) {
    const double v = first + k * step;
    if (v > hi + 1e-9 * step) { break; }
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  if (t.size() < 2) { t = {lo, hi}; }
  return t;
}

inline const char* palette(std::size_t k)
{
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[k % 10];
}

class Frame
{
 public:
  Frame(const ChartStyle& st, double x0, double x1, double y0, double y1) : st_(st)
  {
    xt_ = nice_ticks(x0, x1);
    yt_ = nice_ticks(y0, y1);
    xlo_ = std::min(x0, xt_.front());
    xhi_ = std::max(x1, xt_.back());
    ylo_ = std::min(y0, yt_.front());
    yhi_ = std::max(y1, yt_.back());
    if (!(xhi_ > xlo_)) { xhi_ = xlo_ + 1.0; }
    if (!(yhi_ > ylo_)) { yhi_ = ylo_ + 1.0; }
  }

  double px(double x) const
  {
    const double w = st_.width - st_.margin_left - st_.margin_right;
    return st_.margin_left + (x - xlo_) / (xhi_ - xlo_) * w;
  }
  double py(double y) const
  {
    const double h = st_.height - st_.margin_top - st_.margin_bottom;
    return st_.height - st_.margin_bottom - (y - ylo_) / (yhi_ - ylo_) * h;
  }

  void header(std::ostringstream& os, const std::string& title, const std::string& xlabel,
              const std::string& ylabel) const
  {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << st_.width << "\" height=\"" << st_.height
       << "\" viewBox=\"0 0 " << st_.width << ' ' << st_.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << st_.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
    const double left = px(xlo_), right = px(xhi_), bottom = py(ylo_), top = py(yhi_);
    for (double t : yt_) {
      os << "<line x1=\"" << left << "\" y1=\"" << py(t) << "\" x2=\"" << right << "\" y2=\"" << py(t)
         << "\" stroke=\"#e5e5e5\"/>\n";
      os << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << fmt_num(t)
         << "</text>\n";
    }
    for (double t : xt_) {
      os << "<line x1=\"" << px(t) << "\" y1=\"" << bottom << "\" x2=\"" << px(t) << "\" y2=\"" << bottom + 5
         << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << px(t) << "\" y=\"" << bottom + 18 << "\" text-anchor=\"middle\">" << fmt_num(t)
         << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"black\" points=\"" << left << ',' << top << ' ' << left << ',' << bottom
       << ' ' << right << ',' << bottom << "\"/>\n";
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << st_.height - 15 << "\" text-anchor=\"middle\">"
       << escape(xlabel) << "</text>\n";
    os << "<text transform=\"translate(18," << (top + bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(ylabel) << "</text>\n";
  }

  void legend(std::ostringstream& os, const std::vector<std::string>& names) const
  {
    const double x = st_.width - st_.margin_right + 15;
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double y = st_.margin_top + 10 + 20.0 * static_cast<double>(k);
      os << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y << "\" stroke=\""
         << palette(k) << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\">" << escape(names[k]) << "</text>\n";
    }
  }

 private:
  ChartStyle st_;
  std::vector<double> xt_, yt_;
  double xlo_, xhi_, ylo_, yhi_;
};

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series, const ChartStyle& style = {})
{
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) { continue; }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) { x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0; }
  const detail::Frame f(style, x0, x1, y0, y1);
  std::ostringstream os;
  f.header(os, title, xlabel, ylabel);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    names.push_back(s.name);
    os << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) { continue; }
      os << (i ? " " : "") << detail::fmt_num(f.px(s.x[i])) << ',' << detail::fmt_num(f.py(s.y[i]));
    }
    os << "\"/>\n";
  }
  f.legend(os, names);
  os << "</svg>\n";
  return os.str();
}

inline std::string histogram_chart(const std::string& title, const std::string& xlabel,
                                   const std::vector<double>& edges, const std::vector<std::size_t>& counts,
                                   const ChartStyle& style = {})
{
  double cmax = 0.0;
  for (auto c : counts) { cmax = std::max(cmax, static_cast<double>(c)); }
  const double x0 = edges.empty() ? 0.0 : edges.front();
  const double x1 = edges.empty() ? 1.0 : edges.back();
  ChartStyle st = style;
  st.margin_right = 30;
  const detail::Frame f(st, x0, x1, 0.0, std::max(1.0, cmax));
  std::ostringstream os;
  f.header(os, title, xlabel, "count");
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double l = f.px(edges[k]), r = f.px(edges[k + 1]);
    const double top = f.py(static_cast<double>(counts[k])), bottom = f.py(0.0);
    os << "<rect x=\"" << detail::fmt_num(l) << "\" y=\"" << detail::fmt_num(top) << "\" width=\""
       << detail::fmt_num(std::max(0.5, r - l)) << "\" height=\"" << detail::fmt_num(bottom - top)
       << "\" fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dpfi::io
