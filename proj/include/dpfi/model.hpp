#pragma once

/**
 * @file
 * @brief Market description for continuous-time competitive pricing with
 * fixed inventories, and the linear multiplicative demand model.
 *
 * Observed demand of seller s at time t is
 * \f[
 *   h_s(\pi; \xi) = \big(\alpha_s(t) - \beta_s(t)\pi_s + \sum_{r \neq s} \gamma_{sr}(t)\pi_r\big)\,\xi ,
 * \f]
 * and the uncertainty factor lives in the pointwise band
 * \f$ |\xi(t) - \xi^0(t)| \le \tau \f$.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dpfi/error.hpp"

namespace dpfi {

/// Uniform time grid with trapezoidal quadrature weights.
struct TimeGrid
{
  double t0 = 0.0;
  double tf = 1.0;
  std::size_t n = 2;
  std::vector<double> nodes;
  std::vector<double> weights;

  static TimeGrid uniform(double t0, double tf, std::size_t n)
  {
    if (!(std::isfinite(t0) && std::isfinite(tf)) || !(t0 < tf)) {
      throw ConfigError("time grid requires finite t0 < tf");
    }
    if (n < 2) { throw ConfigError("time grid requires at least 2 nodes"); }
    TimeGrid g;
    g.t0 = t0;
    g.tf = tf;
    g.n = n;
    g.nodes.resize(n);
    g.weights.resize(n);
    const double dt = (tf - t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      g.nodes[i] = t0 + dt * static_cast<double>(i);
      g.weights[i] = dt;
    }
    g.nodes.back() = tf;
    g.weights.front() = 0.5 * dt;
    g.weights.back() = 0.5 * dt;
    return g;
  }

  double dt() const { return (tf - t0) / static_cast<double>(n - 1); }
  double length() const { return tf - t0; }

  /// Trapezoidal integral of nodal values over the whole horizon.
  double integrate(std::span<const double> values) const
  {
    if (values.size() != n) { throw ConfigError("integrand length does not match grid"); }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) { acc += weights[i] * values[i]; }
    return acc;
  }

  /// Running trapezoidal integral; entry i integrates over [t0, t_i].
  std::vector<double> cumulative(std::span<const double> values) const
  {
    if (values.size() != n) { throw ConfigError("integrand length does not match grid"); }
    std::vector<double> out(n, 0.0);
    const double h = dt();
    for (std::size_t i = 1; i < n; ++i) { out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]); }
    return out;
  }
};

/// a + b t, exact at every t.
struct AffinePath
{
  double a = 0.0;
  double b = 0.0;

  double operator()(double t) const { return a + b * t; }
  bool operator==(const AffinePath&) const = default;
};

enum class Mode { nominal, robust };

inline const char* to_string(Mode m) { return m == Mode::nominal ? "nominal" : "robust"; }

inline Mode parse_mode(const std::string& s)
{
  if (s == "nominal") { return Mode::nominal; }
  if (s == "robust") { return Mode::robust; }
  throw ConfigError("unrecognized mode '" + s + "' (expected nominal|robust)");
}

struct UncertaintyModel
{
  AffinePath xi0{1.0, 0.0};
  double tau = 0.0;
};

struct SellerParams
{
  std::string id;
  AffinePath alpha;
  AffinePath beta;
  /// competitor index -> cross-price sensitivity
  std::map<std::size_t, AffinePath> gamma;
  double inventory = 0.0;
  double pi_min = 0.0;
  double pi_max = 1.0;
  double d_min = 1e-6;
};

struct MarketSpec
{
  TimeGrid grid;
  double rho = 0.0;
  std::vector<SellerParams> sellers;
  std::vector<UncertaintyModel> uncertainty;

  std::size_t size() const { return sellers.size(); }

  double gamma(std::size_t s, std::size_t r, double t) const
  {
    const auto& g = sellers[s].gamma;
    auto it = g.find(r);
    return it == g.end() ? 0.0 : it->second(t);
  }

  std::size_t index_of(const std::string& id) const
  {
    for (std::size_t s = 0; s < sellers.size(); ++s) {
      if (sellers[s].id == id) { return s; }
    }
    throw ConfigError("unknown seller id '" + id + "'");
  }

  /// Structural validation; throws ConfigError naming the first problem.
  void validate() const
  {
    if (sellers.empty()) { throw ConfigError("market needs at least one seller"); }
    if (uncertainty.size() != sellers.size()) {
      throw ConfigError("one uncertainty model per seller is required");
    }
    if (!(rho >= 0.0) || !std::isfinite(rho)) { throw ConfigError("discount rate must be finite and >= 0"); }
    if (grid.n < 2 || grid.nodes.size() != grid.n || grid.weights.size() != grid.n) {
      throw ConfigError("malformed time grid");
    }
    for (std::size_t s = 0; s < sellers.size(); ++s) {
      const auto& p = sellers[s];
      const std::string who = "seller " + (p.id.empty() ? std::to_string(s) : p.id);
      if (!(p.inventory > 0.0) || !std::isfinite(p.inventory)) { throw ConfigError(who + ": inventory must be > 0"); }
      if (!(p.pi_min >= 0.0) || !(p.pi_min < p.pi_max) || !std::isfinite(p.pi_max)) {
        throw ConfigError(who + ": price box must satisfy 0 <= pi_min < pi_max");
      }
      if (!(p.d_min > 0.0) || !std::isfinite(p.d_min)) { throw ConfigError(who + ": d_min must be > 0"); }
      for (const auto& [r, path] : p.gamma) {
        if (r >= sellers.size()) { throw ConfigError(who + ": gamma references unknown seller"); }
        if (r == s) { throw ConfigError(who + ": gamma may not reference the seller itself"); }
        if (!std::isfinite(path.a) || !std::isfinite(path.b)) { throw ConfigError(who + ": non-finite gamma"); }
      }
      for (const auto* path : {&p.alpha, &p.beta, &uncertainty[s].xi0}) {
        if (!std::isfinite(path->a) || !std::isfinite(path->b)) { throw ConfigError(who + ": non-finite coefficient"); }
      }
      if (!(uncertainty[s].tau >= 0.0) || !std::isfinite(uncertainty[s].tau)) {
        throw ConfigError(who + ": tau must be finite and >= 0");
      }
    }
  }
};

/// Per-seller price and planned-demand paths on the market grid.
struct StrategyProfile
{
  std::vector<std::vector<double>> prices;
  std::vector<std::vector<double>> plans;

  static StrategyProfile zeros(std::size_t sellers, std::size_t n)
  {
    return {std::vector<std::vector<double>>(sellers, std::vector<double>(n, 0.0)),
            std::vector<std::vector<double>>(sellers, std::vector<double>(n, 0.0))};
  }

  std::vector<double> prices_at(std::size_t i) const
  {
    std::vector<double> out(prices.size());
    for (std::size_t s = 0; s < prices.size(); ++s) { out[s] = prices[s][i]; }
    return out;
  }
};

namespace detail {

inline void check_point(const MarketSpec& m, std::size_t s, std::span<const double> prices, double t)
{
  if (s >= m.sellers.size()) { throw ConfigError("unknown seller id " + std::to_string(s)); }
  if (prices.size() != m.sellers.size()) { throw ConfigError("price tuple length does not match seller count"); }
  if (!std::isfinite(t)) { throw ConfigError("non-finite time"); }
  for (double p : prices) {
    if (!std::isfinite(p)) { throw ConfigError("non-finite price"); }
  }
}

inline void check_shape(const MarketSpec& m, const StrategyProfile& prof)
{
  const std::size_t S = m.sellers.size();
  if (prof.prices.size() != S || prof.plans.size() != S) { throw ConfigError("profile seller count mismatch"); }
  for (std::size_t s = 0; s < S; ++s) {
    if (prof.prices[s].size() != m.grid.n || prof.plans[s].size() != m.grid.n) {
      throw ConfigError("profile path length does not match grid");
    }
  }
}

}  // namespace detail

/// alpha - beta pi_s + sum gamma pi_r (the demand factor multiplying xi).
inline double base_demand(const MarketSpec& m, std::size_t s, std::span<const double> prices, double t)
{
  detail::check_point(m, s, prices, t);
  double v = m.sellers[s].alpha(t) - m.sellers[s].beta(t) * prices[s];
  for (const auto& [r, g] : m.sellers[s].gamma) { v += g(t) * prices[r]; }
  return v;
}

inline double eval_observed_demand(const MarketSpec& m, std::size_t s, std::span<const double> prices, double xi,
                                   double t)
{
  if (!std::isfinite(xi)) { throw ConfigError("non-finite uncertainty factor"); }
  return base_demand(m, s, prices, t) * xi;
}

/// |d h_s / d xi|; for the multiplicative model the base factor's magnitude.
inline double grad_xi_magnitude(const MarketSpec& m, std::size_t s, std::span<const double> prices, double t)
{
  return std::abs(base_demand(m, s, prices, t));
}

/// Largest planned demand that stays servable for every xi in the band.
inline double robust_demand_bound(const MarketSpec& m, std::size_t s, std::span<const double> prices, double t)
{
  const double base = base_demand(m, s, prices, t);
  const auto& u = m.uncertainty[s];
  return base * u.xi0(t) - u.tau * std::abs(base);
}

/// Demand bound used by the constraint set of the given mode.
inline double demand_bound(const MarketSpec& m, std::size_t s, std::span<const double> prices, double t, Mode mode)
{
  return mode == Mode::robust ? robust_demand_bound(m, s, prices, t)
                              : eval_observed_demand(m, s, prices, m.uncertainty[s].xi0(t), t);
}

inline std::vector<double> discounted_revenue(const MarketSpec& m, const StrategyProfile& prof)
{
  detail::check_shape(m, prof);
  std::vector<double> out(m.sellers.size(), 0.0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    for (std::size_t i = 0; i < m.grid.n; ++i) {
      out[s] += m.grid.weights[i] * std::exp(-m.rho * m.grid.nodes[i]) * prof.prices[s][i] * prof.plans[s][i];
    }
  }
  return out;
}

/// Outcome of one regularity check.
struct AssumptionCheck
{
  std::string name;
  std::string description;
  bool passed = true;
  bool by_construction = false;
  std::string witness;
};

struct AssumptionReport
{
  std::vector<AssumptionCheck> checks;

  bool all_passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const AssumptionCheck& at(const std::string& name) const
  {
    for (const auto& c : checks) {
      if (c.name == name) { return c; }
    }
    throw ConfigError("no assumption check named " + name);
  }
};

inline AssumptionReport check_assumptions(const MarketSpec& m)
{
  AssumptionReport rep;
  auto witness = [](std::size_t s, double t, double v) {
    std::ostringstream os;
    os << "seller " << s << " at t=" << t << " value " << v;
    return os.str();
  };
  const std::size_t S = m.sellers.size();

  AssumptionCheck a1{"A1", "price boxes ordered: 0 <= pi_min < pi_max", true, false, {}};
  AssumptionCheck a2{"A2", "demand floor strictly positive", true, false, {}};
  AssumptionCheck a3{"A3", "observed demand concave in prices", true, true, {}};
  AssumptionCheck a4{"A4", "demand strictly decreasing in own price (beta > 0)", true, false, {}};
  AssumptionCheck cross{"gamma", "cross-price sensitivities nonnegative", true, false, {}};
  AssumptionCheck a5{"A5", "demand linear in the uncertainty factor", true, true, {}};
  AssumptionCheck a6{"A6", "|grad_xi h| nondecreasing in own price above the choke price", true, false, {}};
  AssumptionCheck pos{"xi_positive", "worst-case multiplier xi0 - tau stays positive", true, false, {}};

  for (std::size_t s = 0; s < S; ++s) {
    const auto& p = m.sellers[s];
    if (!(p.pi_min >= 0.0 && p.pi_min < p.pi_max) && a1.passed) {
      a1.passed = false;
      a1.witness = "seller " + std::to_string(s);
    }
    if (!(p.d_min > 0.0) && a2.passed) {
      a2.passed = false;
      a2.witness = "seller " + std::to_string(s);
    }
    for (double t : m.grid.nodes) {
      if (const double b = p.beta(t); !(b > 0.0) && a4.passed) {
        a4.passed = false;
        a4.witness = witness(s, t, b);
      }
      for (const auto& [r, g] : p.gamma) {
        if (const double v = g(t); v < 0.0 && cross.passed) {
          cross.passed = false;
          cross.witness = witness(s, t, v);
        }
      }
      const double mult = m.uncertainty[s].xi0(t) - m.uncertainty[s].tau;
      if (!(mult > 0.0) && pos.passed) {
        pos.passed = false;
        pos.witness = witness(s, t, mult);
      }
    }
  }

  // A6 by sampling an own-price sweep with competitors at their price floors.
  for (std::size_t s = 0; s < S && a6.passed; ++s) {
    for (std::size_t i = 0; i < m.grid.n && a6.passed; ++i) {
      const double t = m.grid.nodes[i];
      std::vector<double> prices(S);
      for (std::size_t r = 0; r < S; ++r) { prices[r] = m.sellers[r].pi_min; }
      const double beta = m.sellers[s].beta(t);
      if (!(beta > 0.0)) { continue; }  // reported under A4
      prices[s] = 0.0;
      const double choke = base_demand(m, s, prices, t) / beta;
      const double hi = std::max({choke, m.sellers[s].pi_max}) * 2.0 + 1.0;
      constexpr int samples = 64;
      double prev_mag = -std::numeric_limits<double>::infinity();
      double prev_signed = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= samples; ++k) {
        prices[s] = hi * k / samples;
        const double f = base_demand(m, s, prices, t);
        if (prices[s] >= choke) {
          const double mag = std::abs(f);
          if (mag + 1e-12 * (1.0 + std::abs(mag)) < prev_mag) {
            a6.passed = false;
            a6.witness = witness(s, t, prices[s]);
          }
          prev_mag = mag;
        } else {
          if (!(f < prev_signed)) {
            a6.passed = false;
            a6.witness = witness(s, t, prices[s]);
          }
          prev_signed = f;
        }
      }
    }
  }
  rep.checks = {a1, a2, a3, a4, cross, a5, a6, pos};
  return rep;
}

enum class ConstraintKind { price_lower, price_upper, plan_lower, inventory, demand };

inline const char* to_string(ConstraintKind k)
{
  switch (k) {
    case ConstraintKind::price_lower: return "price_lower";
    case ConstraintKind::price_upper: return "price_upper";
    case ConstraintKind::plan_lower: return "plan_lower";
    case ConstraintKind::inventory: return "inventory";
    case ConstraintKind::demand: return "demand";
  }
  return "?";
}

struct Violation
{
  ConstraintKind kind;
  std::size_t seller;
  std::size_t node;  // meaningless for inventory
  double amount;
};

inline std::vector<Violation> feasibility_check(const MarketSpec& m, const StrategyProfile& prof, Mode mode,
                                                double tol)
{
  if (!(tol > 0.0)) { throw ConfigError("feasibility tolerance must be positive"); }
  detail::check_shape(m, prof);
  std::vector<Violation> out;
  for (std::size_t s = 0; s < m.sellers.size(); ++s) {
    const auto& p = m.sellers[s];
    for (std::size_t i = 0; i < m.grid.n; ++i) {
      const double pr = prof.prices[s][i];
      const double d = prof.plans[s][i];
      if (p.pi_min - pr > tol) { out.push_back({ConstraintKind::price_lower, s, i, p.pi_min - pr}); }
      if (pr - p.pi_max > tol) { out.push_back({ConstraintKind::price_upper, s, i, pr - p.pi_max}); }
      if (p.d_min - d > tol) { out.push_back({ConstraintKind::plan_lower, s, i, p.d_min - d}); }
      const auto at = prof.prices_at(i);
      const double bound = demand_bound(m, s, at, m.grid.nodes[i], mode);
      if (d - bound > tol) { out.push_back({ConstraintKind::demand, s, i, d - bound}); }
    }
    const double sold = m.grid.integrate(prof.plans[s]);
    if (std::abs(sold - p.inventory) > tol) {
      out.push_back({ConstraintKind::inventory, s, 0, sold - p.inventory});
    }
  }
  return out;
}

}  // namespace dpfi
