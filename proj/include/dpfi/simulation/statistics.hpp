#pragma once

/**
 * @file
 * @brief Summary statistics and histograms of simulated profits.
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dpfi/error.hpp"

namespace dpfi {

/// Pairwise (cascade) summation; result does not depend on thread layout.
inline double pairwise_sum(std::span<const double> v)
{
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) { s += x; }
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct Histogram
{
  std::vector<double> edges;  // counts.size() + 1
  std::vector<std::size_t> counts;
};

struct SummaryStats
{
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator); 0 for a single value.
  double sd = 0.0;
  std::size_t n = 0;
};

inline SummaryStats summarize(std::span<const double> v)
{
  if (v.empty()) { throw ConfigError("cannot summarize an empty sample"); }
  SummaryStats s;
  s.n = v.size();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  s.mean = pairwise_sum(v) / static_cast<double>(v.size());
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (v.size() > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) { sq[i] = (v[i] - s.mean) * (v[i] - s.mean); }
    s.sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
  }
  return s;
}

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q)
{
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < sorted.size() ? sorted[i] * (1.0 - f) + sorted[i + 1] * f : sorted[i];
}

/**
 * Freedman-Diaconis bin width 2 IQR n^(-1/3), at least `min_bins` bins (and at
 * most `max_bins`).  A zero-width sample gets min_bins unit-wide bins centred
 * on its value.
 */
inline Histogram histogram(std::span<const double> v, std::size_t min_bins = 10, std::size_t max_bins = 1000)
{
  if (v.empty()) { throw ConfigError("cannot bin an empty sample"); }
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double lo = s.front(), hi = s.back();
  Histogram h;
  std::size_t bins = min_bins;
  double left = lo, width;
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
    const double half = 0.5 * std::max(1.0, 1e-6 * std::abs(lo)) * static_cast<double>(min_bins);
    left = lo - half;
    width = 2.0 * half / static_cast<double>(min_bins);
  } else {
    const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    if (iqr > 0.0) {
      const double fd = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
      bins = static_cast<std::size_t>(std::ceil((hi - lo) / fd));
    }
    bins = std::clamp(bins, min_bins, max_bins);
    width = (hi - lo) / static_cast<double>(bins);
  }
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) { h.edges[k] = left + width * static_cast<double>(k); }
  h.counts.assign(bins, 0);
  for (double x : s) {
    auto k = static_cast<std::size_t>(std::floor((x - left) / width));
    h.counts[std::min(k, bins - 1)]++;
  }
  return h;
}

}  // namespace dpfi
