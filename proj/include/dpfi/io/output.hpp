#pragma once

/**
 * @file
 * @brief Serialization of solver and simulation results to CSV, JSON and SVG.
 *
 * Everything here returns text; the caller decides where it goes.  Number
 * formatting is fixed so identical inputs give identical bytes.
 */

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpfi/io/svg.hpp"
#include "dpfi/model.hpp"
#include "dpfi/simulation/experiments.hpp"
#include "dpfi/solver/equilibrium.hpp"

namespace dpfi::io {

using json = nlohmann::json;

inline std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// K - integral of the plan from t0 to each node (trapezoid rule).
inline std::vector<double> remaining_inventory(const TimeGrid& g, const std::vector<double>& plan, double K)
{
  std::vector<double> out(g.n);
  double sold = 0.0;
  out[0] = K;
  for (std::size_t i = 1; i < g.n; ++i) {
    sold += 0.5 * (g.nodes[i] - g.nodes[i - 1]) * (plan[i] + plan[i - 1]);
    out[i] = K - sold;
  }
  return out;
}

// ---------------------------------------------------------------- solutions

inline std::string solution_csv(const MarketSpec& m, const StrategyProfile& prof)
{
  std::ostringstream os;
  os << "seller,t,price,plan,remaining_inventory\n";
  for (std::size_t s = 0; s < m.size(); ++s) {
    const auto rem = remaining_inventory(m.grid, prof.plans[s], m.sellers[s].inventory);
    for (std::size_t i = 0; i < m.grid.n; ++i) {
      os << m.sellers[s].id << ',' << fmt(m.grid.nodes[i]) << ',' << fmt(prof.prices[s][i]) << ','
         << fmt(prof.plans[s][i]) << ',' << fmt(rem[i]) << '\n';
    }
  }
  return os.str();
}

inline json binding_json(const MarketSpec& m, const BindingReport& b)
{
  json sellers = json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    std::size_t tight = 0;
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < b.demand_binds[s].size(); ++i) {
      if (b.demand_binds[s][i]) {
        ++tight;
        nodes.push_back(i);
      }
    }
    sellers.push_back({{"id", m.sellers[s].id},
                       {"demand_binding_nodes", tight},
                       {"demand_slack_nodes", b.demand_binds[s].size() - tight},
                       {"demand_slack_at", [&] {
                          std::vector<std::size_t> slack;
                          for (std::size_t i = 0; i < b.demand_binds[s].size(); ++i) {
                            if (!b.demand_binds[s][i]) { slack.push_back(i); }
                          }
                          return slack;
                        }()},
                       {"price_floor_nodes", b.price_floor_nodes[s]},
                       {"price_cap_nodes", b.price_cap_nodes[s]},
                       {"plan_floor_nodes", b.plan_floor_nodes[s]}});
  }
  return {{"sellers", sellers}, {"rule_rows_binding", b.rule_rows_binding}};
}

/// Result as JSON.  Timing is left out so the file is reproducible.
inline json solution_json(const MarketSpec& m, Mode mode, const SolverResult& r)
{
  json sellers = json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    sellers.push_back({{"id", m.sellers[s].id},
                       {"prices", r.profile.prices[s]},
                       {"plans", r.profile.plans[s]},
                       {"remaining_inventory",
                        remaining_inventory(m.grid, r.profile.plans[s], m.sellers[s].inventory)},
                       {"revenue", r.revenues[s]}});
  }
  json j{{"mode", to_string(mode)},
         {"t", m.grid.nodes},
         {"sellers", sellers},
         {"iterations", r.iterations},
         {"step_alpha", r.step_alpha},
         {"step_norm_trace", r.step_norm_trace},
         {"finished_by_active_set", r.finished_by_active_set},
         {"binding", binding_json(m, r.binding)},
         {"warnings", r.warnings}};
  j["vi_gap"] = r.vi_gap ? json(*r.vi_gap) : json(nullptr);
  return j;
}

inline std::string revenue_csv(const MarketSpec& m, const std::vector<double>& revenues)
{
  std::ostringstream os;
  os << "seller,revenue\n";
  for (std::size_t s = 0; s < m.size(); ++s) { os << m.sellers[s].id << ',' << fmt(revenues[s]) << '\n'; }
  return os.str();
}

/// Price, remaining inventory and demand plots for one profile.
inline std::map<std::string, std::string> solution_plots(const MarketSpec& m, const StrategyProfile& prof,
                                                         const std::string& suffix = "")
{
  std::vector<Series> price, inventory, demand;
  for (std::size_t s = 0; s < m.size(); ++s) {
    const std::string name = "seller " + m.sellers[s].id;
    price.push_back({name, m.grid.nodes, prof.prices[s]});
    inventory.push_back({name, m.grid.nodes, remaining_inventory(m.grid, prof.plans[s], m.sellers[s].inventory)});
    demand.push_back({name, m.grid.nodes, prof.plans[s]});
  }
  const std::string tag = suffix.empty() ? "" : " (" + suffix + ")";
  const std::string file = suffix.empty() ? "" : "_" + suffix;
  return {{"prices" + file + ".svg", line_chart("Equilibrium prices" + tag, "t", "price", price)},
          {"inventory" + file + ".svg", line_chart("Remaining inventory" + tag, "t", "units", inventory)},
          {"demand" + file + ".svg", line_chart("Planned demand" + tag, "t", "units per time", demand)}};
}

// ---------------------------------------------------------------- simulation

inline std::string draws_csv(const MarketSpec& m, const ScenarioReport& rep)
{
  std::ostringstream os;
  os << "draw_index,seller,profit\n";
  for (std::size_t d = 0; d < rep.n_draws; ++d) {
    for (std::size_t s = 0; s < m.size(); ++s) { os << d << ',' << m.sellers[s].id << ',' << fmt(rep.profits[s][d]) << '\n'; }
  }
  return os.str();
}

inline std::string profit_histogram(const MarketSpec& m, const ScenarioReport& rep, std::size_t s)
{
  const auto& h = rep.sellers[s].histogram;
  return histogram_chart("Profit of seller " + m.sellers[s].id + ", " + rep.cell + ", " + rep.dist.label(), "profit",
                         h.edges, h.counts);
}

inline json stats_json(const SummaryStats& st)
{
  return {{"min", st.min}, {"max", st.max}, {"mean", st.mean}, {"sd", st.sd}, {"n", st.n}};
}

inline json scenario_json(const MarketSpec& m, const ScenarioReport& rep)
{
  json sellers = json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    sellers.push_back({{"id", m.sellers[s].id},
                       {"stats", stats_json(rep.sellers[s].stats)},
                       {"max_total_sales", rep.sellers[s].max_total_sales},
                       {"histogram", {{"edges", rep.sellers[s].histogram.edges}, {"counts", rep.sellers[s].histogram.counts}}}});
  }
  return {{"cell", rep.cell}, {"distribution", rep.dist.label()}, {"n_draws", rep.n_draws}, {"seed", rep.seed},
          {"sellers", sellers}};
}

/// Table with one row per (cell, seller): min, max, mean, sd.
inline std::string matrix_csv(const MarketSpec& m, const std::vector<ScenarioReport>& reports)
{
  std::ostringstream os;
  os << "cell,seller,min,max,mean,sd\n";
  for (const auto& rep : reports) {
    for (std::size_t s = 0; s < m.size(); ++s) {
      const auto& st = rep.sellers[s].stats;
      os << rep.cell << ',' << m.sellers[s].id << ',' << fmt(st.min) << ',' << fmt(st.max) << ',' << fmt(st.mean) << ','
         << fmt(st.sd) << '\n';
    }
  }
  return os.str();
}

inline std::string robustness_csv(const MarketSpec& m, const std::vector<double>& tau_bars,
                                  const std::vector<ScenarioReport>& reports)
{
  std::ostringstream os;
  os << "tau_bar,cell,seller,min,max,mean,sd\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    for (std::size_t s = 0; s < m.size(); ++s) {
      const auto& st = reports[k].sellers[s].stats;
      os << fmt(tau_bars[k]) << ',' << reports[k].cell << ',' << m.sellers[s].id << ',' << fmt(st.min) << ','
         << fmt(st.max) << ',' << fmt(st.mean) << ',' << fmt(st.sd) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------- sweeps

inline std::string sweep_csv(const MarketSpec& m, const std::vector<SweepPoint>& pts)
{
  std::ostringstream os;
  os << "value,seller,status,revenue\n";
  for (const auto& p : pts) {
    for (std::size_t s = 0; s < m.size(); ++s) {
      os << fmt(p.value) << ',' << m.sellers[s].id << ',' << (p.ok ? "ok" : "failed") << ','
         << (p.ok ? fmt(p.revenues[s]) : "") << '\n';
    }
  }
  return os.str();
}

inline std::string sweep_paths_csv(const MarketSpec& m, const std::vector<SweepPoint>& pts)
{
  std::ostringstream os;
  os << "value,seller,t,price,plan\n";
  for (const auto& p : pts) {
    if (!p.ok) { continue; }
    for (std::size_t s = 0; s < m.size(); ++s) {
      for (std::size_t i = 0; i < m.grid.n; ++i) {
        os << fmt(p.value) << ',' << m.sellers[s].id << ',' << fmt(m.grid.nodes[i]) << ','
           << fmt(p.profile.prices[s][i]) << ',' << fmt(p.profile.plans[s][i]) << '\n';
      }
    }
  }
  return os.str();
}

/// Revenue-vs-value curve plus one price and one demand plot per seller.
inline std::map<std::string, std::string> sweep_plots(const MarketSpec& m, const std::string& label,
                                                      const std::vector<SweepPoint>& pts)
{
  std::map<std::string, std::string> out;
  std::vector<Series> rev;
  for (std::size_t s = 0; s < m.size(); ++s) {
    Series sr{"seller " + m.sellers[s].id, {}, {}};
    for (const auto& p : pts) {
      if (!p.ok) { continue; }
      sr.x.push_back(p.value);
      sr.y.push_back(p.revenues[s]);
    }
    rev.push_back(std::move(sr));
  }
  out["sweep_revenue.svg"] = line_chart("Revenue vs " + label, label, "revenue", rev);
  for (std::size_t s = 0; s < m.size(); ++s) {
    std::vector<Series> price, demand;
    for (const auto& p : pts) {
      if (!p.ok) { continue; }
      const std::string name = label + " = " + fmt(p.value);
      price.push_back({name, m.grid.nodes, p.profile.prices[s]});
      demand.push_back({name, m.grid.nodes, p.profile.plans[s]});
    }
    out["sweep_prices_seller" + m.sellers[s].id + ".svg"] =
        line_chart("Prices of seller " + m.sellers[s].id + " vs " + label, "t", "price", price);
    out["sweep_demand_seller" + m.sellers[s].id + ".svg"] =
        line_chart("Planned demand of seller " + m.sellers[s].id + " vs " + label, "t", "units per time", demand);
  }
  return out;
}

}  // namespace dpfi::io
