#pragma once

/**
 * @file
 * @brief Time-lagged pricing rules as linear constraint rows.
 *
 * A rule relates the price at t + delta to quantities at t.  Shifts are whole
 * grid steps, d = delta / dt.  The response rule refers to the shifted price
 * through the previous iterate (implicit lag), so its right-hand side is
 * refreshed on every fixed-point iteration while its coefficients stay put.
 */

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/solver/discretize.hpp"

namespace dpfi {

enum class RuleKind { response, monotone, moving_average };

inline const char* to_string(RuleKind k)
{
  switch (k) {
    case RuleKind::response: return "response";
    case RuleKind::monotone: return "monotone";
    case RuleKind::moving_average: return "moving_average";
  }
  return "?";
}

inline RuleKind parse_rule_kind(const std::string& s)
{
  if (s == "response") { return RuleKind::response; }
  if (s == "monotone") { return RuleKind::monotone; }
  if (s == "moving_average") { return RuleKind::moving_average; }
  throw ConfigError("unknown rule kind '" + s + "' (expected response|monotone|moving_average)");
}

struct PricingRule
{
  RuleKind kind = RuleKind::monotone;
  double delta = 0.0;
  /// Response strength per seller (response rules only).
  std::vector<double> sigma;
  /// Moving-average rows start once t - t0 reaches this; 0 means one grid step.
  double epsilon_start = 0.0;
};

/// A single linear row: lo <= sum coef * u[idx] <= hi.
struct RuleRow
{
  std::vector<std::pair<Eigen::Index, double>> terms;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::size_t seller = 0;
  std::size_t node = 0;
  /// For lagged rows the bound is u[shift_col] + base; -1 otherwise.
  Eigen::Index shift_col = -1;
  double base = 0.0;
};

inline std::size_t shift_index(const PricingRule& rule, const TimeGrid& grid)
{
  if (!(rule.delta > 0.0) || !std::isfinite(rule.delta)) { throw ConfigError("rule delta must be positive"); }
  const double ratio = rule.delta / grid.dt();
  const double d = std::round(ratio);
  if (d < 1.0 || std::abs(ratio - d) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("rule delta must be a whole multiple of the grid spacing");
  }
  return static_cast<std::size_t>(d);
}

/**
 * pi(t+delta) = pi(t) + sigma [h(pi; m) - D(t)] with pi(t+delta) frozen at
 * prev_prices, rearranged to
 * (1 - sigma m beta) pi_s + sigma m sum gamma pi_r - sigma D_s = prev - sigma m alpha.
 */
inline std::vector<RuleRow> response_rule_rows(const PricingRule& rule, const Discretization& disc,
                                               const std::vector<std::vector<double>>& prev_prices, Mode mode)
{
  if (rule.kind != RuleKind::response) { throw ConfigError("not a response rule"); }
  const std::size_t d = shift_index(rule, disc.grid());
  if (rule.sigma.size() != disc.S) { throw ConfigError("response rule needs one sigma per seller"); }
  if (prev_prices.size() != disc.S) { throw ConfigError("previous prices have wrong seller count"); }
  std::vector<RuleRow> rows;
  for (std::size_t s = 0; s < disc.S; ++s) {
    const double sig = rule.sigma[s];
    if (!(sig > 0.0) || !std::isfinite(sig)) { throw ConfigError("response sigma must be positive"); }
    if (prev_prices[s].size() != disc.n) { throw ConfigError("previous prices have wrong length"); }
    for (std::size_t i = 0; i + d < disc.n; ++i) {
      const double m = disc.multiplier(s, i, mode);
      RuleRow row;
      row.seller = s;
      row.node = i;
      row.terms.emplace_back(disc.price_index(s, i), 1.0 - sig * m * disc.beta[s][i]);
      for (std::size_t r = 0; r < disc.S; ++r) {
        if (r != s && disc.gamma[s][r][i] != 0.0) {
          row.terms.emplace_back(disc.price_index(r, i), sig * m * disc.gamma[s][r][i]);
        }
      }
      row.terms.emplace_back(disc.plan_index(s, i), -sig);
      row.base = -sig * m * disc.alpha[s][i];
      row.shift_col = disc.price_index(s, i + d);
      row.lo = row.hi = prev_prices[s][i + d] + row.base;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// pi_s(t) - pi_s(t+delta) <= 0.
inline std::vector<RuleRow> monotone_rule_rows(const PricingRule& rule, const Discretization& disc)
{
  if (rule.kind != RuleKind::monotone) { throw ConfigError("not a monotone rule"); }
  const std::size_t d = shift_index(rule, disc.grid());
  std::vector<RuleRow> rows;
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 0; i + d < disc.n; ++i) {
      RuleRow row;
      row.seller = s;
      row.node = i;
      row.terms = {{disc.price_index(s, i), 1.0}, {disc.price_index(s, i + d), -1.0}};
      row.hi = 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/**
 * pi_s(t+delta) <= (1/(t-t0)) sum_k int_{t0}^{t} pi_k, the sum running over all
 * sellers (no division by the seller count).  All terms are current
 * variables, so no lag substitution is needed.
 */
inline std::vector<RuleRow> moving_average_rows(const PricingRule& rule, const Discretization& disc)
{
  if (rule.kind != RuleKind::moving_average) { throw ConfigError("not a moving-average rule"); }
  const std::size_t d = shift_index(rule, disc.grid());
  const auto& g = disc.grid();
  const double eps = rule.epsilon_start > 0.0 ? rule.epsilon_start : g.dt();
  const double h = g.dt();
  std::vector<RuleRow> rows;
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 1; i + d < disc.n; ++i) {
      const double span = g.nodes[i] - g.t0;
      if (span < eps * (1.0 - 1e-12)) { continue; }
      RuleRow row;
      row.seller = s;
      row.node = i;
      row.terms.emplace_back(disc.price_index(s, i + d), 1.0);
      for (std::size_t k = 0; k < disc.S; ++k) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double w = (j == 0 || j == i) ? 0.5 * h : h;
          row.terms.emplace_back(disc.price_index(k, j), -w / span);
        }
      }
      row.hi = 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::vector<RuleRow> rule_rows(const PricingRule& rule, const Discretization& disc,
                                      const std::vector<std::vector<double>>& prev_prices, Mode mode)
{
  switch (rule.kind) {
    case RuleKind::response: return response_rule_rows(rule, disc, prev_prices, mode);
    case RuleKind::monotone: return monotone_rule_rows(rule, disc);
    case RuleKind::moving_average: return moving_average_rows(rule, disc);
  }
  return {};
}

}  // namespace dpfi
