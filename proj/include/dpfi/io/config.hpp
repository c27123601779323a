#pragma once

/**
 * @file
 * @brief JSON run configuration: parsing with strict key checking,
 * serialization of the resolved config, dotted-path overrides and the
 * built-in presets.
 */

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/model.hpp"
#include "dpfi/rules.hpp"
#include "dpfi/simulation/experiments.hpp"
#include "dpfi/simulation/random.hpp"
#include "dpfi/solver/equilibrium.hpp"

namespace dpfi::io {

using nlohmann::json;

enum class ExperimentKind { solve, matrix, sweep, robustness };

inline const char* to_string(ExperimentKind k)
{
  switch (k) {
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::matrix: return "matrix";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::robustness: return "robustness";
  }
  return "?";
}

inline ExperimentKind parse_experiment(const std::string& s)
{
  if (s == "solve") { return ExperimentKind::solve; }
  if (s == "matrix") { return ExperimentKind::matrix; }
  if (s == "sweep") { return ExperimentKind::sweep; }
  if (s == "robustness") { return ExperimentKind::robustness; }
  throw ConfigError("unknown experiment '" + s + "' (expected solve|matrix|sweep|robustness)");
}

struct SweepSpec
{
  std::string seller;
  Coefficient coefficient = Coefficient::alpha;
  std::string competitor;
  std::vector<double> values;
};

struct RobustnessSpec
{
  RobustCase rcase = RobustCase::I;
  std::vector<double> tau_bar_values;
};

struct RunConfig
{
  std::string name;
  MarketSpec market;
  Mode mode = Mode::robust;
  SolverConfig solver;
  std::vector<PricingRule> rules;
  ExperimentKind experiment = ExperimentKind::solve;
  std::optional<SweepSpec> sweep;
  std::optional<RobustnessSpec> robustness;
  std::vector<DistributionSpec> distributions{DistributionSpec{}};
  std::size_t n_draws = 10000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::vector<std::string> notes;
};

namespace detail {

/// Rejects keys outside `allowed` and reports the JSON path.
inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed,
                       std::initializer_list<const char*> required = {})
{
  if (!j.is_object()) { throw ConfigError(where + ": expected an object"); }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) { throw ConfigError(where + ": unknown key '" + k + "'"); }
  }
  for (const char* r : required) {
    if (!j.contains(r)) { throw ConfigError(where + ": missing required key '" + std::string(r) + "'"); }
  }
}

inline double num(const json& j, const std::string& where)
{
  if (!j.is_number()) { throw ConfigError(where + ": expected a number"); }
  const double v = j.get<double>();
  if (!std::isfinite(v)) { throw ConfigError(where + ": expected a finite number"); }
  return v;
}

inline AffinePath affine(const json& j, const std::string& where)
{
  if (j.is_number()) { return {num(j, where), 0.0}; }
  check_keys(j, where, {"a", "b"}, {"a"});
  return {num(j.at("a"), where + ".a"), j.contains("b") ? num(j.at("b"), where + ".b") : 0.0};
}

inline json affine_json(const AffinePath& p) { return json{{"a", p.a}, {"b", p.b}}; }

inline std::string str(const json& j, const std::string& where)
{
  if (!j.is_string()) { throw ConfigError(where + ": expected a string"); }
  return j.get<std::string>();
}

inline std::size_t count(const json& j, const std::string& where)
{
  if (!j.is_number_integer() || j.get<long long>() < 0) { throw ConfigError(where + ": expected a nonnegative integer"); }
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& where)
{
  if (!j.is_array()) { throw ConfigError(where + ": expected an array"); }
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) { out.push_back(num(j[k], where + "[" + std::to_string(k) + "]")); }
  return out;
}

}  // namespace detail

inline MarketSpec parse_market(const json& j)
{
  using namespace detail;
  check_keys(j, "market", {"horizon", "grid_nodes", "rho", "sellers"}, {"horizon", "grid_nodes", "rho", "sellers"});
  check_keys(j.at("horizon"), "market.horizon", {"t0", "tf"}, {"t0", "tf"});
  MarketSpec m;
  const std::size_t n = count(j.at("grid_nodes"), "market.grid_nodes");
  m.grid = TimeGrid::uniform(num(j.at("horizon").at("t0"), "market.horizon.t0"),
                             num(j.at("horizon").at("tf"), "market.horizon.tf"), n);
  m.rho = num(j.at("rho"), "market.rho");
  const auto& js = j.at("sellers");
  if (!js.is_array() || js.empty()) { throw ConfigError("market.sellers: expected a nonempty array"); }
  std::vector<std::string> ids;
  for (std::size_t s = 0; s < js.size(); ++s) {
    const std::string w = "market.sellers[" + std::to_string(s) + "]";
    check_keys(js[s], w, {"id", "alpha", "beta", "gamma", "inventory", "pi_min", "pi_max", "d_min", "uncertainty"},
               {"id", "alpha", "beta", "inventory", "pi_min", "pi_max", "d_min", "uncertainty"});
    const std::string id = str(js[s].at("id"), w + ".id");
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) { throw ConfigError(w + ": duplicate seller id '" + id + "'"); }
    ids.push_back(id);
  }
  for (std::size_t s = 0; s < js.size(); ++s) {
    const std::string w = "market.sellers[" + std::to_string(s) + "]";
    const auto& o = js[s];
    SellerParams p;
    p.id = ids[s];
    p.alpha = affine(o.at("alpha"), w + ".alpha");
    p.beta = affine(o.at("beta"), w + ".beta");
    if (o.contains("gamma")) {
      if (!o.at("gamma").is_object()) { throw ConfigError(w + ".gamma: expected an object keyed by seller id"); }
      for (const auto& [rid, path] : o.at("gamma").items()) {
        const auto it = std::find(ids.begin(), ids.end(), rid);
        if (it == ids.end()) { throw ConfigError(w + ".gamma: unknown seller id '" + rid + "'"); }
        p.gamma[static_cast<std::size_t>(it - ids.begin())] = affine(path, w + ".gamma." + rid);
      }
    }
    p.inventory = num(o.at("inventory"), w + ".inventory");
    p.pi_min = num(o.at("pi_min"), w + ".pi_min");
    p.pi_max = num(o.at("pi_max"), w + ".pi_max");
    p.d_min = num(o.at("d_min"), w + ".d_min");
    check_keys(o.at("uncertainty"), w + ".uncertainty", {"xi0", "tau"}, {"xi0", "tau"});
    UncertaintyModel u;
    u.xi0 = affine(o.at("uncertainty").at("xi0"), w + ".uncertainty.xi0");
    u.tau = num(o.at("uncertainty").at("tau"), w + ".uncertainty.tau");
    m.sellers.push_back(p);
    m.uncertainty.push_back(u);
  }
  m.validate();
  return m;
}

inline json market_json(const MarketSpec& m)
{
  json sellers = json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    const auto& p = m.sellers[s];
    json g = json::object();
    for (const auto& [r, path] : p.gamma) { g[m.sellers[r].id] = detail::affine_json(path); }
    sellers.push_back({{"id", p.id},
                       {"alpha", detail::affine_json(p.alpha)},
                       {"beta", detail::affine_json(p.beta)},
                       {"gamma", g},
                       {"inventory", p.inventory},
                       {"pi_min", p.pi_min},
                       {"pi_max", p.pi_max},
                       {"d_min", p.d_min},
                       {"uncertainty", {{"xi0", detail::affine_json(m.uncertainty[s].xi0)}, {"tau", m.uncertainty[s].tau}}}});
  }
  return {{"horizon", {{"t0", m.grid.t0}, {"tf", m.grid.tf}}},
          {"grid_nodes", m.grid.n},
          {"rho", m.rho},
          {"sellers", sellers}};
}

inline SolverConfig parse_solver(const json& j)
{
  using namespace detail;
  check_keys(j, "solver",
             {"step_alpha", "eps1", "max_iters", "qp_tol", "representation", "gap_check", "active_set_finish",
              "divergence_window", "max_halvings"});
  SolverConfig c;
  if (j.contains("step_alpha") && !j.at("step_alpha").is_null()) { c.step_alpha = num(j.at("step_alpha"), "solver.step_alpha"); }
  if (j.contains("eps1")) { c.eps1 = num(j.at("eps1"), "solver.eps1"); }
  if (j.contains("max_iters")) { c.max_iters = static_cast<int>(count(j.at("max_iters"), "solver.max_iters")); }
  if (j.contains("qp_tol")) { c.qp_tol = num(j.at("qp_tol"), "solver.qp_tol"); }
  if (j.contains("representation")) { c.representation = parse_representation(str(j.at("representation"), "solver.representation")); }
  auto flag = [&](const char* k, bool& out) {
    if (j.contains(k)) {
      if (!j.at(k).is_boolean()) { throw ConfigError(std::string("solver.") + k + ": expected a boolean"); }
      out = j.at(k).get<bool>();
    }
  };
  flag("gap_check", c.gap_check);
  flag("active_set_finish", c.active_set_finish);
  if (j.contains("divergence_window")) { c.divergence_window = static_cast<int>(count(j.at("divergence_window"), "solver.divergence_window")); }
  if (j.contains("max_halvings")) { c.max_halvings = static_cast<int>(count(j.at("max_halvings"), "solver.max_halvings")); }
  c.validate();
  return c;
}

inline json solver_json(const SolverConfig& c)
{
  return {{"step_alpha", c.step_alpha ? json(*c.step_alpha) : json(nullptr)},
          {"eps1", c.eps1},
          {"max_iters", c.max_iters},
          {"qp_tol", c.qp_tol},
          {"representation", to_string(c.representation)},
          {"gap_check", c.gap_check},
          {"active_set_finish", c.active_set_finish},
          {"divergence_window", c.divergence_window},
          {"max_halvings", c.max_halvings}};
}

inline PricingRule parse_rule(const json& j, const MarketSpec& m, const std::string& where)
{
  using namespace detail;
  check_keys(j, where, {"kind", "delta", "sigma", "epsilon_start"}, {"kind", "delta"});
  PricingRule r;
  r.kind = parse_rule_kind(str(j.at("kind"), where + ".kind"));
  r.delta = num(j.at("delta"), where + ".delta");
  if (r.kind == RuleKind::response) {
    if (!j.contains("sigma")) { throw ConfigError(where + ": response rule needs sigma"); }
    const auto& sj = j.at("sigma");
    r.sigma.assign(m.size(), 0.0);
    if (sj.is_number()) {
      r.sigma.assign(m.size(), num(sj, where + ".sigma"));
    } else {
      if (!sj.is_object()) { throw ConfigError(where + ".sigma: expected a number or an object keyed by seller id"); }
      std::vector<bool> seen(m.size(), false);
      for (const auto& [id, v] : sj.items()) {
        const std::size_t s = m.index_of(id);
        r.sigma[s] = num(v, where + ".sigma." + id);
        seen[s] = true;
      }
      for (std::size_t s = 0; s < m.size(); ++s) {
        if (!seen[s]) { throw ConfigError(where + ".sigma: missing seller '" + m.sellers[s].id + "'"); }
      }
    }
  } else if (j.contains("sigma")) {
    throw ConfigError(where + ": sigma applies to response rules only");
  }
  if (j.contains("epsilon_start")) {
    if (r.kind != RuleKind::moving_average) { throw ConfigError(where + ": epsilon_start applies to moving_average only"); }
    r.epsilon_start = num(j.at("epsilon_start"), where + ".epsilon_start");
  }
  shift_index(r, m.grid);
  return r;
}

inline json rule_json(const PricingRule& r, const MarketSpec& m)
{
  json j{{"kind", to_string(r.kind)}, {"delta", r.delta}};
  if (r.kind == RuleKind::response) {
    json s = json::object();
    for (std::size_t k = 0; k < r.sigma.size(); ++k) { s[m.sellers[k].id] = r.sigma[k]; }
    j["sigma"] = s;
  }
  if (r.kind == RuleKind::moving_average && r.epsilon_start > 0.0) { j["epsilon_start"] = r.epsilon_start; }
  return j;
}

inline DistributionSpec parse_dist(const json& j, const std::string& where)
{
  using namespace detail;
  if (j.is_string()) { return parse_distribution(j.get<std::string>()); }
  check_keys(j, where, {"family", "a", "b"}, {"family", "a", "b"});
  DistributionSpec d{str(j.at("family"), where + ".family"), num(j.at("a"), where + ".a"), num(j.at("b"), where + ".b")};
  d.validate();
  return d;
}

inline RunConfig parse_run_config(const json& j)
{
  using namespace detail;
  check_keys(j, "config",
             {"name", "market", "mode", "solver", "rules", "experiment", "distributions", "n_draws", "seed",
              "output_dir", "notes"},
             {"market"});
  RunConfig c;
  if (j.contains("name")) { c.name = str(j.at("name"), "name"); }
  c.market = parse_market(j.at("market"));
  if (j.contains("mode")) { c.mode = parse_mode(str(j.at("mode"), "mode")); }
  if (j.contains("solver")) { c.solver = parse_solver(j.at("solver")); }
  if (j.contains("rules")) {
    if (!j.at("rules").is_array()) { throw ConfigError("rules: expected an array"); }
    for (std::size_t k = 0; k < j.at("rules").size(); ++k) {
      c.rules.push_back(parse_rule(j.at("rules")[k], c.market, "rules[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    check_keys(e, "experiment", {"kind", "sweep", "robustness"}, {"kind"});
    c.experiment = parse_experiment(str(e.at("kind"), "experiment.kind"));
    if (e.contains("sweep")) {
      const auto& s = e.at("sweep");
      check_keys(s, "experiment.sweep", {"seller", "coefficient", "competitor", "values"},
                 {"seller", "coefficient", "values"});
      SweepSpec sp;
      sp.seller = str(s.at("seller"), "experiment.sweep.seller");
      c.market.index_of(sp.seller);
      sp.coefficient = parse_coefficient(str(s.at("coefficient"), "experiment.sweep.coefficient"));
      if (sp.coefficient == Coefficient::gamma) {
        if (!s.contains("competitor")) { throw ConfigError("experiment.sweep: gamma sweeps need a competitor"); }
        sp.competitor = str(s.at("competitor"), "experiment.sweep.competitor");
        c.market.index_of(sp.competitor);
      }
      sp.values = numbers(s.at("values"), "experiment.sweep.values");
      if (sp.values.empty()) { throw ConfigError("experiment.sweep.values: need at least one value"); }
      c.sweep = sp;
    }
    if (e.contains("robustness")) {
      const auto& r = e.at("robustness");
      check_keys(r, "experiment.robustness", {"case", "tau_bar_values"}, {"case", "tau_bar_values"});
      RobustnessSpec rs;
      rs.rcase = parse_robust_case(str(r.at("case"), "experiment.robustness.case"));
      rs.tau_bar_values = numbers(r.at("tau_bar_values"), "experiment.robustness.tau_bar_values");
      if (rs.tau_bar_values.empty()) { throw ConfigError("experiment.robustness.tau_bar_values: need at least one value"); }
      c.robustness = rs;
    }
    if (c.experiment == ExperimentKind::sweep && !c.sweep) { throw ConfigError("experiment.sweep is required for sweeps"); }
    if (c.experiment == ExperimentKind::robustness && !c.robustness) {
      throw ConfigError("experiment.robustness is required for robustness runs");
    }
  }
  if (j.contains("distributions")) {
    const auto& d = j.at("distributions");
    if (!d.is_array() || d.empty()) { throw ConfigError("distributions: expected a nonempty array"); }
    c.distributions.clear();
    for (std::size_t k = 0; k < d.size(); ++k) { c.distributions.push_back(parse_dist(d[k], "distributions[" + std::to_string(k) + "]")); }
  }
  if (j.contains("n_draws")) {
    c.n_draws = count(j.at("n_draws"), "n_draws");
    if (c.n_draws == 0) { throw ConfigError("n_draws: must be >= 1"); }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) { c.output_dir = str(j.at("output_dir"), "output_dir"); }
  if (j.contains("notes")) {
    if (!j.at("notes").is_array()) { throw ConfigError("notes: expected an array of strings"); }
    for (const auto& n : j.at("notes")) { c.notes.push_back(str(n, "notes[]")); }
  }
  return c;
}

inline json run_config_json(const RunConfig& c)
{
  json rules = json::array();
  for (const auto& r : c.rules) { rules.push_back(rule_json(r, c.market)); }
  json exp{{"kind", to_string(c.experiment)}};
  if (c.sweep) {
    json s{{"seller", c.sweep->seller}, {"coefficient", to_string(c.sweep->coefficient)}, {"values", c.sweep->values}};
    if (c.sweep->coefficient == Coefficient::gamma) { s["competitor"] = c.sweep->competitor; }
    exp["sweep"] = s;
  }
  if (c.robustness) {
    exp["robustness"] = {{"case", to_string(c.robustness->rcase)}, {"tau_bar_values", c.robustness->tau_bar_values}};
  }
  json dists = json::array();
  for (const auto& d : c.distributions) { dists.push_back({{"family", d.family}, {"a", d.a}, {"b", d.b}}); }
  json j{{"name", c.name},
         {"market", market_json(c.market)},
         {"mode", to_string(c.mode)},
         {"solver", solver_json(c.solver)},
         {"rules", rules},
         {"experiment", exp},
         {"distributions", dists},
         {"n_draws", c.n_draws},
         {"seed", c.seed},
         {"output_dir", c.output_dir}};
  if (!c.notes.empty()) { j["notes"] = c.notes; }
  return j;
}

inline json load_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot read config file '" + path + "'"); }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

/**
 * Applies "a.b.2.c=value" to a JSON document.  Array elements are addressed
 * by index; a value that parses as JSON is used as such, otherwise it is
 * taken as a string.
 */
inline void apply_override(json& doc, const std::string& assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) { throw ConfigError("override must look like key.path=value"); }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* cur = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) { parts.push_back(part); }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const bool last = k + 1 == parts.size();
    const auto& key = parts[k];
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::logic_error&) {
        throw ConfigError("override path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= cur->size()) { throw ConfigError("override path '" + path + "': index out of range"); }
      cur = &(*cur)[idx];
    } else {
      if (cur->is_null()) { *cur = json::object(); }
      if (!cur->is_object()) { throw ConfigError("override path '" + path + "' descends into a scalar"); }
      cur = &(*cur)[key];
    }
    if (last) { *cur = value; }
  }
}

// ---------------------------------------------------------------- presets

inline std::vector<std::string> preset_names()
{
  return {"ex-8.1.1",    "ex-8.1.2",       "ex-8.2",          "sens-alpha1",    "sens-beta1",
          "sens-gamma2", "robust-case-I", "robust-case-II", "robust-case-III"};
}

namespace detail {

struct TwoSellerCoefficients
{
  double alpha1, alpha2;
  AffinePath beta1, beta2, gamma1, gamma2;
};

inline MarketSpec preset_market(const TwoSellerCoefficients& c, std::size_t grid_nodes = 64)
{
  MarketSpec m;
  m.grid = TimeGrid::uniform(1.0, 10.0, grid_nodes);
  m.rho = 0.0;
  const double K[2] = {2500.0, 3000.0};
  const double alpha[2] = {c.alpha1, c.alpha2};
  const AffinePath beta[2] = {c.beta1, c.beta2};
  const AffinePath gamma[2] = {c.gamma1, c.gamma2};
  for (std::size_t s = 0; s < 2; ++s) {
    SellerParams p;
    p.id = std::to_string(s + 1);
    p.alpha = {alpha[s], 0.0};
    p.beta = beta[s];
    p.gamma[1 - s] = gamma[s];
    p.inventory = K[s];
    p.pi_min = 0.0;
    // 1.2 x the single-seller choke price alpha(t0) / beta(tf), rounded up.
    p.pi_max = std::ceil(1.2 * p.alpha(m.grid.t0) / p.beta(m.grid.tf));
    p.d_min = 1e-6 * p.inventory / m.grid.length();
    m.sellers.push_back(p);
    m.uncertainty.push_back({{3.0, 0.1}, 0.8});
  }
  return m;
}

}  // namespace detail

inline RunConfig preset(const std::string& name)
{
  using detail::TwoSellerCoefficients;
  const TwoSellerCoefficients identical{3000, 3000, {180, -4}, {180, -4}, {36, -2}, {36, -2}};
  const TwoSellerCoefficients unequal{2500, 3000, {180, -4}, {170, -4}, {36, -2}, {34, -2}};
  const TwoSellerCoefficients robustness{2500, 3500, {175, -4}, {170, -4}, {35, -2}, {34, -2}};
  const TwoSellerCoefficients sensitivity{2500, 3500, {170, -4}, {170, -4}, {40, -2}, {40, -2}};

  RunConfig c;
  c.name = name;
  c.notes.push_back("rho is not given for these examples; 0 is used (override with --rho)");
  c.distributions = {DistributionSpec{"beta", 1.0, 1.0}};
  c.seed = 20240101;
  c.n_draws = 10000;
  if (name == "ex-8.1.1") {
    c.market = detail::preset_market(identical);
  } else if (name == "ex-8.1.2") {
    c.market = detail::preset_market(unequal);
  } else if (name == "ex-8.2") {
    c.market = detail::preset_market(robustness);
    c.experiment = ExperimentKind::matrix;
    c.distributions = {DistributionSpec{"beta", 1.0, 1.0}, DistributionSpec{"beta", 1.0, 3.0}};
  } else if (name == "sens-alpha1" || name == "sens-beta1" || name == "sens-gamma2") {
    c.market = detail::preset_market(sensitivity);
    c.experiment = ExperimentKind::sweep;
    SweepSpec s;
    if (name == "sens-alpha1") {
      s = {"1", Coefficient::alpha, "", {2300, 2400, 2500, 2600, 2700}};
    } else if (name == "sens-beta1") {
      s = {"1", Coefficient::beta, "", {160, 165, 170, 175, 180}};
    } else {
      s = {"2", Coefficient::gamma, "1", {36, 38, 40, 42, 44}};
    }
    c.sweep = s;
    c.notes.push_back("swept values replace the intercept of the coefficient; the time slope is kept");
  } else if (name == "robust-case-I" || name == "robust-case-II" || name == "robust-case-III") {
    c.market = detail::preset_market(robustness);
    c.experiment = ExperimentKind::robustness;
    c.distributions = {DistributionSpec{"beta", 1.0, 3.0}};
    RobustnessSpec r;
    r.rcase = name == "robust-case-I" ? RobustCase::I : name == "robust-case-II" ? RobustCase::II : RobustCase::III;
    for (int k = 0; k <= 8; ++k) { r.tau_bar_values.push_back(k / 10.0); }
    r.tau_bar_values.back() = 0.8;
    c.robustness = r;
  } else {
    std::string all;
    for (const auto& n : preset_names()) { all += (all.empty() ? "" : ", ") + n; }
    throw ConfigError("unknown preset '" + name + "' (available: " + all + ")");
  }
  c.output_dir = "out/" + name;
  return c;
}

}  // namespace dpfi::io
