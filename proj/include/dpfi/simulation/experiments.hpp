#pragma once

/**
 * @file
 * @brief Monte Carlo evaluation of posted price/plan policies: realized
 * sales, realized profits, the nominal/robust policy matrix, and the
 * sensitivity and robust-magnitude sweeps.
 *
 * A policy is R(tau_bar): the seller plans with safety margin tau_bar
 * (N = R(0)).  Each seller believes everyone plays its own policy, so its
 * posted paths come from the equilibrium with all margins set to its tau_bar.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/model.hpp"
#include "dpfi/simulation/random.hpp"
#include "dpfi/simulation/statistics.hpp"
#include "dpfi/solver/equilibrium.hpp"

namespace dpfi {

/// sales = max(0, min(plan, observed demand)) at every node.
inline std::vector<std::vector<double>> realized_sales(const StrategyProfile& posted, const MarketSpec& market,
                                                       const std::vector<std::vector<double>>& xi)
{
  detail::check_shape(market, posted);
  if (xi.size() != market.size()) { throw ConfigError("xi seller count mismatch"); }
  const std::size_t n = market.grid.n;
  std::vector<std::vector<double>> sales(market.size(), std::vector<double>(n));
  std::vector<double> at(market.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < market.size(); ++s) { at[s] = posted.prices[s][i]; }
    for (std::size_t s = 0; s < market.size(); ++s) {
      if (xi[s].size() != n) { throw ConfigError("xi path length mismatch"); }
      const double obs = eval_observed_demand(market, s, at, xi[s][i], market.grid.nodes[i]);
      sales[s][i] = std::max(0.0, std::min(posted.plans[s][i], obs));
    }
  }
  return sales;
}

inline std::vector<double> realized_profit(const std::vector<std::vector<double>>& prices,
                                           const std::vector<std::vector<double>>& sales, double rho,
                                           const TimeGrid& grid)
{
  if (prices.size() != sales.size()) { throw ConfigError("price/sales seller count mismatch"); }
  std::vector<double> out(prices.size(), 0.0);
  for (std::size_t s = 0; s < prices.size(); ++s) {
    if (prices[s].size() != grid.n || sales[s].size() != grid.n) { throw ConfigError("price/sales length mismatch"); }
    for (std::size_t i = 0; i < grid.n; ++i) {
      out[s] += grid.weights[i] * std::exp(-rho * grid.nodes[i]) * prices[s][i] * sales[s][i];
    }
  }
  return out;
}

/// Per-seller safety margins; 0 is the nominal policy.
struct ScenarioCell
{
  std::vector<double> tau_bar;

  std::string label(double tau_true) const
  {
    std::string s;
    for (double t : tau_bar) {
      if (t == 0.0) {
        s += 'N';
      } else if (t == tau_true) {
        s += 'R';
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "R(%g)", t);
        s += buf;
      }
    }
    return s;
  }
};

struct SellerReport
{
  SummaryStats stats;
  Histogram histogram;
  double max_total_sales = 0.0;
};

struct ScenarioReport
{
  std::string cell;
  DistributionSpec dist;
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;
  std::vector<SellerReport> sellers;
  /// profits[s][draw]
  std::vector<std::vector<double>> profits;
};

/// Solves each distinct belief once; keyed by the margin.
class EquilibriumCache
{
 public:
  EquilibriumCache(MarketSpec market, std::vector<PricingRule> rules, SolverConfig cfg)
      : market_(std::move(market)), rules_(std::move(rules)), cfg_(std::move(cfg))
  {}

  const MarketSpec& market() const { return market_; }

  /// Equilibrium with every seller's tau replaced by tau_bar.
  const SolverResult& get(double tau_bar)
  {
    auto it = cache_.find(tau_bar);
    if (it != cache_.end()) { return it->second; }
    MarketSpec m = market_;
    for (auto& u : m.uncertainty) { u.tau = tau_bar; }
    return cache_.emplace(tau_bar, solve_equilibrium(m, Mode::robust, rules_, cfg_)).first->second;
  }

 private:
  MarketSpec market_;
  std::vector<PricingRule> rules_;
  SolverConfig cfg_;
  std::map<double, SolverResult> cache_;
};

/// Posted cross-policy profile: seller s's paths from the all-play-tau_bar[s] equilibrium.
inline StrategyProfile build_scenario(EquilibriumCache& cache, const ScenarioCell& cell)
{
  const auto& m = cache.market();
  if (cell.tau_bar.size() != m.size()) { throw ConfigError("scenario cell needs one policy per seller"); }
  auto prof = StrategyProfile::zeros(m.size(), m.grid.n);
  for (std::size_t s = 0; s < m.size(); ++s) {
    const double t = cell.tau_bar[s];
    if (!(t >= 0.0) || t > m.uncertainty[s].tau + 1e-12) {
      throw ConfigError("policy margin must lie in [0, tau] for seller " + m.sellers[s].id);
    }
    const auto& eq = cache.get(t);
    prof.prices[s] = eq.profile.prices[s];
    prof.plans[s] = eq.profile.plans[s];
  }
  return prof;
}

inline std::size_t default_threads()
{
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/**
 * Monte Carlo evaluation of a posted profile; the true uncertainty is the
 * market's (xi0, tau).  Results do not depend on `threads`.
 */
inline ScenarioReport run_scenario(const MarketSpec& market, const StrategyProfile& posted, const DistributionSpec& dist,
                                   std::size_t n_draws, std::uint64_t seed, std::size_t threads = default_threads())
{
  dist.validate();
  if (n_draws == 0) { throw ConfigError("n_draws must be >= 1"); }
  detail::check_shape(market, posted);
  const std::size_t S = market.size();
  ScenarioReport rep;
  rep.dist = dist;
  rep.n_draws = n_draws;
  rep.seed = seed;
  rep.profits.assign(S, std::vector<double>(n_draws));
  std::vector<std::vector<double>> total_sales(S, std::vector<double>(n_draws));

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>> xi(S);
    for (std::size_t d = begin; d < end; ++d) {
      for (std::size_t s = 0; s < S; ++s) { xi[s] = sample_xi(market.uncertainty[s], dist, market.grid, s, d, seed); }
      const auto sales = realized_sales(posted, market, xi);
      const auto profit = realized_profit(posted.prices, sales, market.rho, market.grid);
      for (std::size_t s = 0; s < S; ++s) {
        rep.profits[s][d] = profit[s];
        total_sales[s][d] = market.grid.integrate(sales[s]);
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, n_draws);
  if (threads == 1) {
    work(0, n_draws);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_draws + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n_draws, b + chunk);
      if (b < e) { pool.emplace_back(work, b, e); }
    }
    for (auto& th : pool) { th.join(); }
  }
  rep.sellers.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    rep.sellers[s].stats = summarize(rep.profits[s]);
    rep.sellers[s].histogram = histogram(rep.profits[s]);
    rep.sellers[s].max_total_sales = *std::max_element(total_sales[s].begin(), total_sales[s].end());
  }
  return rep;
}

/// All 2^S combinations of N and R(tau) per seller, N before R, first seller slowest.
inline std::vector<ScenarioCell> policy_cells(const MarketSpec& market)
{
  const std::size_t S = market.size();
  std::vector<ScenarioCell> cells;
  for (std::size_t mask = 0; mask < (std::size_t{1} << S); ++mask) {
    ScenarioCell c;
    for (std::size_t s = 0; s < S; ++s) {
      const bool robust = (mask >> (S - 1 - s)) & 1U;
      c.tau_bar.push_back(robust ? market.uncertainty[s].tau : 0.0);
    }
    cells.push_back(c);
  }
  return cells;
}

struct MatrixResult
{
  std::vector<ScenarioCell> cells;
  /// reports[d][c] for distribution d and cell c
  std::vector<std::vector<ScenarioReport>> reports;
};

inline MatrixResult scenario_matrix(EquilibriumCache& cache, const std::vector<DistributionSpec>& dists,
                                    std::size_t n_draws, std::uint64_t seed, std::size_t threads = default_threads())
{
  const auto& m = cache.market();
  MatrixResult out;
  out.cells = policy_cells(m);
  std::vector<StrategyProfile> posted;
  for (const auto& c : out.cells) { posted.push_back(build_scenario(cache, c)); }
  for (const auto& d : dists) {
    std::vector<ScenarioReport> row;
    for (std::size_t c = 0; c < out.cells.size(); ++c) {
      auto rep = run_scenario(m, posted[c], d, n_draws, seed, threads);
      rep.cell = out.cells[c].label(m.uncertainty.front().tau);
      row.push_back(std::move(rep));
    }
    out.reports.push_back(std::move(row));
  }
  return out;
}

enum class Coefficient { alpha, beta, gamma };

inline Coefficient parse_coefficient(const std::string& s)
{
  if (s == "alpha") { return Coefficient::alpha; }
  if (s == "beta") { return Coefficient::beta; }
  if (s == "gamma") { return Coefficient::gamma; }
  throw ConfigError("unknown coefficient '" + s + "' (expected alpha|beta|gamma)");
}

inline const char* to_string(Coefficient c)
{
  return c == Coefficient::alpha ? "alpha" : c == Coefficient::beta ? "beta" : "gamma";
}

/// The swept value replaces the intercept `a` of the selected affine coefficient.
struct SweepTarget
{
  std::size_t seller = 0;
  Coefficient coefficient = Coefficient::alpha;
  /// Competitor index for gamma.
  std::size_t competitor = 0;
};

struct SweepPoint
{
  double value = 0.0;
  bool ok = false;
  std::string error;
  StrategyProfile profile;
  std::vector<double> revenues;
};

inline MarketSpec apply_sweep_value(const MarketSpec& base, const SweepTarget& target, double value)
{
  MarketSpec m = base;
  if (target.seller >= m.size()) { throw ConfigError("sweep target seller out of range"); }
  auto& sp = m.sellers[target.seller];
  switch (target.coefficient) {
    case Coefficient::alpha: sp.alpha.a = value; break;
    case Coefficient::beta: sp.beta.a = value; break;
    case Coefficient::gamma: {
      auto it = sp.gamma.find(target.competitor);
      if (it == sp.gamma.end()) { throw ConfigError("sweep target gamma does not exist"); }
      it->second.a = value;
      break;
    }
  }
  return m;
}

/// One robust equilibrium per value; failed points are recorded and skipped.
inline std::vector<SweepPoint> sensitivity_sweep(const MarketSpec& base, const SweepTarget& target,
                                                 const std::vector<double>& values,
                                                 const std::vector<PricingRule>& rules, const SolverConfig& cfg,
                                                 Mode mode = Mode::robust)
{
  std::vector<SweepPoint> out;
  for (double v : values) {
    SweepPoint pt;
    pt.value = v;
    try {
      const MarketSpec m = apply_sweep_value(base, target, v);
      const auto rep = check_assumptions(m);
      if (!rep.all_passed()) {
        for (const auto& c : rep.checks) {
          if (!c.passed) { throw ConfigError("assumption " + c.name + " fails: " + c.witness); }
        }
      }
      const auto res = solve_equilibrium(m, mode, rules, cfg);
      pt.profile = res.profile;
      pt.revenues = res.revenues;
      pt.ok = true;
    } catch (const Error& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

enum class RobustCase { I, II, III };

inline RobustCase parse_robust_case(const std::string& s)
{
  if (s == "I") { return RobustCase::I; }
  if (s == "II") { return RobustCase::II; }
  if (s == "III") { return RobustCase::III; }
  throw ConfigError("unknown robustness case '" + s + "' (expected I|II|III)");
}

inline const char* to_string(RobustCase c) { return c == RobustCase::I ? "I" : c == RobustCase::II ? "II" : "III"; }

/**
 * Seller 1 (index 0) posts N (case I), R(tau) (case II) or R(tau_bar)
 * (case III); every other seller posts R(tau_bar).  One report per tau_bar.
 */
inline std::vector<ScenarioReport> robustness_sweep(EquilibriumCache& cache, RobustCase rcase,
                                                    const std::vector<double>& tau_bars, const DistributionSpec& dist,
                                                    std::size_t n_draws, std::uint64_t seed,
                                                    std::size_t threads = default_threads())
{
  const auto& m = cache.market();
  if (m.size() < 2) { throw ConfigError("robustness sweep needs at least two sellers"); }
  std::vector<ScenarioReport> out;
  for (double tb : tau_bars) {
    ScenarioCell cell;
    cell.tau_bar.assign(m.size(), tb);
    cell.tau_bar[0] = rcase == RobustCase::I ? 0.0 : rcase == RobustCase::II ? m.uncertainty[0].tau : tb;
    auto rep = run_scenario(m, build_scenario(cache, cell), dist, n_draws, seed, threads);
    rep.cell = cell.label(m.uncertainty[0].tau);
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace dpfi
