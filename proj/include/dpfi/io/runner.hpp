#pragma once

/**
 * @file
 * @brief Runs one configured experiment and collects every artifact in a
 * Bundle.  Nothing touches the filesystem until the run has succeeded.
 */

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "dpfi/io/config.hpp"
#include "dpfi/io/manifest.hpp"
#include "dpfi/io/output.hpp"

namespace dpfi::io {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_config = 2, exit_convergence = 3, exit_infeasible = 4 };

struct RunOutcome
{
  Bundle bundle;
  int status = exit_ok;
  std::vector<std::string> messages;
};

namespace detail {

class Stopwatch
{
 public:
  double lap()
  {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline std::string dist_tag(const DistributionSpec& d) { return d.family + "_" + fmt(d.a) + "_" + fmt(d.b); }

inline json assumptions_json(const AssumptionReport& rep)
{
  json out = json::array();
  for (const auto& c : rep.checks) {
    out.push_back({{"name", c.name},
                   {"description", c.description},
                   {"passed", c.passed},
                   {"by_construction", c.by_construction},
                   {"witness", c.witness}});
  }
  return out;
}

inline void add_solution(Bundle& b, const MarketSpec& m, Mode mode, const SolverResult& r, const std::string& suffix = "")
{
  const std::string file = suffix.empty() ? "" : "_" + suffix;
  b.add("solution" + file + ".csv", solution_csv(m, r.profile));
  b.add_json("solution" + file + ".json", solution_json(m, mode, r));
  b.add("revenue" + file + ".csv", revenue_csv(m, r.revenues));
  for (auto& [name, svg] : solution_plots(m, r.profile, suffix)) { b.add(name, std::move(svg)); }
}

/// Margin shared by all sellers, or -1 if they differ.
inline double common_tau(const MarketSpec& m)
{
  const double tau = m.uncertainty.front().tau;
  for (const auto& u : m.uncertainty) {
    if (u.tau != tau) { return -1.0; }
  }
  return tau;
}

}  // namespace detail

/// Assumptions plus nonemptiness of the strategy set; throws InfeasibleError if empty.
inline json check_market(const RunConfig& cfg)
{
  const auto rep = check_assumptions(cfg.market);
  const auto disc = discretize(cfg.market);
  build_feasible_set(disc, cfg.mode, cfg.rules);
  return {{"mode", to_string(cfg.mode)}, {"assumptions_passed", rep.all_passed()},
          {"assumptions", detail::assumptions_json(rep)}, {"feasible", true}};
}

/**
 * Runs cfg.experiment.  Errors thrown by the library propagate; the caller
 * maps them to exit codes with exit_code().
 */
inline RunOutcome run_experiment(const RunConfig& cfg, std::size_t threads = default_threads())
{
  RunOutcome out;
  auto& b = out.bundle;
  detail::Stopwatch clock;
  const auto& m = cfg.market;

  const auto assumptions = check_assumptions(m);
  for (const auto& c : assumptions.checks) {
    if (!c.passed) { out.messages.push_back("warning: assumption " + c.name + " fails (" + c.witness + ")"); }
  }
  b.add_json("assumptions.json", detail::assumptions_json(assumptions));

  switch (cfg.experiment) {
    case ExperimentKind::solve: {
      const auto r = solve_equilibrium(m, cfg.mode, cfg.rules, cfg.solver);
      b.timing("solve", clock.lap());
      for (const auto& w : r.warnings) { out.messages.push_back("warning: " + w); }
      detail::add_solution(b, m, cfg.mode, r);
      break;
    }
    case ExperimentKind::matrix: {
      EquilibriumCache cache(m, cfg.rules, cfg.solver);
      const double tau = detail::common_tau(m);
      if (tau >= 0.0) {
        detail::add_solution(b, m, Mode::robust, cache.get(tau));
        detail::add_solution(b, m, Mode::nominal, cache.get(0.0), "nominal");
      }
      b.timing("equilibria", clock.lap());
      const auto res = scenario_matrix(cache, cfg.distributions, cfg.n_draws, cfg.seed, threads);
      for (std::size_t d = 0; d < cfg.distributions.size(); ++d) {
        const std::string tag = detail::dist_tag(cfg.distributions[d]);
        b.add("matrix_" + tag + ".csv", matrix_csv(m, res.reports[d]));
        json cells_json = json::array();
        for (const auto& rep : res.reports[d]) {
          cells_json.push_back(scenario_json(m, rep));
          b.add("draws_" + tag + "_" + rep.cell + ".csv", draws_csv(m, rep));
          for (std::size_t s = 0; s < m.size(); ++s) {
            b.add("hist_" + tag + "_" + rep.cell + "_seller" + m.sellers[s].id + ".svg", profit_histogram(m, rep, s));
          }
        }
        b.add_json("matrix_" + tag + ".json", cells_json);
      }
      b.timing("simulation", clock.lap());
      break;
    }
    case ExperimentKind::sweep: {
      const auto& sp = *cfg.sweep;
      SweepTarget target;
      target.seller = m.index_of(sp.seller);
      target.coefficient = sp.coefficient;
      if (sp.coefficient == Coefficient::gamma) { target.competitor = m.index_of(sp.competitor); }
      const auto base = solve_equilibrium(m, cfg.mode, cfg.rules, cfg.solver);
      detail::add_solution(b, m, cfg.mode, base);
      const auto pts = sensitivity_sweep(m, target, sp.values, cfg.rules, cfg.solver, cfg.mode);
      b.timing("sweep", clock.lap());
      std::string label = std::string(to_string(sp.coefficient)) + "_" + sp.seller;
      if (sp.coefficient == Coefficient::gamma) { label += "," + sp.competitor; }
      b.add("sweep.csv", sweep_csv(m, pts));
      b.add("sweep_paths.csv", sweep_paths_csv(m, pts));
      for (auto& [name, svg] : sweep_plots(m, label, pts)) { b.add(name, std::move(svg)); }
      for (const auto& p : pts) {
        if (!p.ok) {
          out.messages.push_back("sweep point " + fmt(p.value) + " failed: " + p.error);
          out.status = exit_convergence;
        }
      }
      break;
    }
    case ExperimentKind::robustness: {
      const auto& rs = *cfg.robustness;
      EquilibriumCache cache(m, cfg.rules, cfg.solver);
      detail::add_solution(b, m, Mode::robust, cache.get(m.uncertainty.front().tau));
      b.timing("equilibria", clock.lap());
      for (const auto& dist : cfg.distributions) {
        const std::string tag = detail::dist_tag(dist);
        const auto reps = robustness_sweep(cache, rs.rcase, rs.tau_bar_values, dist, cfg.n_draws, cfg.seed, threads);
        b.add("robustness_" + tag + ".csv", robustness_csv(m, rs.tau_bar_values, reps));
        json arr = json::array();
        for (std::size_t k = 0; k < reps.size(); ++k) {
          json j = scenario_json(m, reps[k]);
          j["tau_bar"] = rs.tau_bar_values[k];
          arr.push_back(j);
          const std::string key = tag + "_tau" + fmt(rs.tau_bar_values[k]);
          b.add("draws_" + key + ".csv", draws_csv(m, reps[k]));
          for (std::size_t s = 0; s < m.size(); ++s) {
            b.add("hist_" + key + "_seller" + m.sellers[s].id + ".svg", profit_histogram(m, reps[k], s));
          }
        }
        b.add_json("robustness_" + tag + ".json", arr);
        std::vector<Series> sd;
        for (std::size_t s = 0; s < m.size(); ++s) {
          Series sr{"seller " + m.sellers[s].id, rs.tau_bar_values, {}};
          for (const auto& r : reps) { sr.y.push_back(r.sellers[s].stats.sd); }
          sd.push_back(std::move(sr));
        }
        b.add("robustness_sd_" + tag + ".svg",
              line_chart("Profit SD vs tau_bar, case " + std::string(to_string(rs.rcase)), "tau_bar", "SD", sd));
      }
      b.timing("simulation", clock.lap());
      break;
    }
  }
  return out;
}

/// Maps a library exception to a process exit code.
inline int exit_code(const std::exception& e)
{
  if (dynamic_cast<const ConfigError*>(&e)) { return exit_config; }
  if (dynamic_cast<const InfeasibleError*>(&e)) { return exit_infeasible; }
  if (dynamic_cast<const ConvergenceError*>(&e)) { return exit_convergence; }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) { return exit_config; }
  return exit_error;
}

}  // namespace dpfi::io
