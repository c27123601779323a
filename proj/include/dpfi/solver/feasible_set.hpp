#pragma once

/**
 * @file
 * @brief The shared strategy set: boxes, inventory equalities, demand
 * inequalities (robust or nominal) and optional pricing-rule rows.
 *
 * Demand row for seller s at node i, with m = xi0 - tau (robust) or xi0:
 *   D_{s,i} + m beta pi_{s,i} - sum_r m gamma_{sr} pi_{r,i} <= m alpha.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/qp/constraint_system.hpp"
#include "dpfi/qp/simplex.hpp"
#include "dpfi/rules.hpp"
#include "dpfi/solver/discretize.hpp"

namespace dpfi {

enum class RowKind { inventory, demand, response, monotone, moving_average };

inline const char* to_string(RowKind k)
{
  switch (k) {
    case RowKind::inventory: return "inventory";
    case RowKind::demand: return "demand";
    case RowKind::response: return "response";
    case RowKind::monotone: return "monotone";
    case RowKind::moving_average: return "moving_average";
  }
  return "?";
}

struct RowTag
{
  RowKind kind;
  std::size_t seller;
  std::size_t node;
};

struct LaggedRow
{
  Eigen::Index row;
  Eigen::Index shift_col;
  double base;
};

struct FeasibleSet
{
  Mode mode = Mode::robust;
  qp::ConstraintSystem system;
  std::vector<RowTag> tags;
  std::vector<LaggedRow> lagged;

  bool has_lag() const { return !lagged.empty(); }

  /// Re-seats the implicit-lag rows on the prices of u.
  void update_lag(const qp::Vector& u)
  {
    for (const auto& l : lagged) { system.lo[l.row] = system.hi[l.row] = u[l.shift_col] + l.base; }
  }

  /// Sparse map R with (bound of lagged rows) = base + R u.
  qp::RowMatrix lag_matrix() const
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& l : lagged) { trip.emplace_back(l.row, l.shift_col, 1.0); }
    qp::RowMatrix R(system.rows(), system.cols());
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
  }
};

namespace detail {

inline RowKind row_kind(RuleKind k)
{
  switch (k) {
    case RuleKind::response: return RowKind::response;
    case RuleKind::monotone: return RowKind::monotone;
    case RuleKind::moving_average: return RowKind::moving_average;
  }
  return RowKind::monotone;
}

/// Prices solving the binding demand system at node i for given plans.
inline std::vector<double> binding_prices(const Discretization& disc, std::size_t i, const std::vector<double>& plans,
                                          Mode mode)
{
  const auto S = static_cast<Eigen::Index>(disc.S);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(S, S);
  Eigen::VectorXd rhs(S);
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto ss = static_cast<Eigen::Index>(s);
    M(ss, ss) = disc.beta[s][i];
    for (std::size_t r = 0; r < disc.S; ++r) {
      if (r != s) { M(ss, static_cast<Eigen::Index>(r)) = -disc.gamma[s][r][i]; }
    }
    rhs[ss] = disc.alpha[s][i] - plans[s] / disc.multiplier(s, i, mode);
  }
  const Eigen::VectorXd p = M.fullPivLu().solve(rhs);
  return {p.data(), p.data() + p.size()};
}

}  // namespace detail

/**
 * Constant plans K_s / T with binding prices, clamped to the boxes.  Plans
 * are scaled by `plan_scale` (use 1 - 1e-6 for a strictly interior probe).
 */
inline StrategyProfile binding_profile(const Discretization& disc, Mode mode, double plan_scale = 1.0)
{
  auto prof = StrategyProfile::zeros(disc.S, disc.n);
  const double T = disc.grid().length();
  std::vector<double> plans(disc.S);
  for (std::size_t s = 0; s < disc.S; ++s) { plans[s] = plan_scale * disc.market.sellers[s].inventory / T; }
  for (std::size_t i = 0; i < disc.n; ++i) {
    const auto p = detail::binding_prices(disc, i, plans, mode);
    for (std::size_t s = 0; s < disc.S; ++s) {
      const auto& sp = disc.market.sellers[s];
      prof.prices[s][i] = std::clamp(p[s], sp.pi_min, sp.pi_max);
      prof.plans[s][i] = plans[s];
    }
  }
  return prof;
}

/// Throws InfeasibleError naming the first seller whose demand capacity cannot absorb K.
[[noreturn]] inline void diagnose_infeasible(const Discretization& disc, Mode mode)
{
  const auto& g = disc.grid();
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto& sp = disc.market.sellers[s];
    double cap = 0.0;
    std::size_t worst = 0;
    double worst_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < disc.n; ++i) {
      double base = disc.alpha[s][i] - disc.beta[s][i] * sp.pi_min;
      for (std::size_t r = 0; r < disc.S; ++r) {
        if (r != s) { base += disc.gamma[s][r][i] * disc.market.sellers[r].pi_max; }
      }
      const double b = disc.multiplier(s, i, mode) * base;
      cap += g.weights[i] * b;
      if (b < worst_val) {
        worst_val = b;
        worst = i;
      }
      if (b < sp.d_min) {
        std::ostringstream os;
        os << "market is infeasible: seller " << sp.id << " cannot serve the demand floor at t=" << g.nodes[i]
           << " (largest servable demand " << b << ")";
        throw InfeasibleError(os.str(), static_cast<int>(s), static_cast<int>(i));
      }
    }
    if (cap < sp.inventory) {
      std::ostringstream os;
      os << "market is infeasible: seller " << sp.id << " can sell at most " << cap << " units over the horizon but K = "
         << sp.inventory;
      throw InfeasibleError(os.str(), static_cast<int>(s), static_cast<int>(worst));
    }
  }
  throw InfeasibleError("market is infeasible: shared constraints (including pricing rules) admit no strategy", 0, -1);
}

/**
 * Builds the discretized shared set.  `prev` seeds the right-hand sides of
 * lagged rows (defaults to the binding profile).  Throws InfeasibleError if
 * the set is empty.
 */
inline FeasibleSet build_feasible_set(const Discretization& disc, Mode mode, const std::vector<PricingRule>& rules = {},
                                      const StrategyProfile* prev = nullptr)
{
  if (mode == Mode::robust) {
    for (std::size_t s = 0; s < disc.S; ++s) {
      for (std::size_t i = 0; i < disc.n; ++i) {
        if (!(disc.multiplier(s, i, mode) > 0.0)) {
          throw ConfigError("xi0 - tau must stay positive for seller " + disc.market.sellers[s].id);
        }
      }
    }
  }
  FeasibleSet fs;
  fs.mode = mode;
  qp::ConstraintBuilder b(disc.size());
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto& sp = disc.market.sellers[s];
    for (std::size_t i = 0; i < disc.n; ++i) {
      b.bound(disc.price_index(s, i), sp.pi_min, sp.pi_max);
      b.bound(disc.plan_index(s, i), sp.d_min, qp::inf);
    }
  }
  for (std::size_t s = 0; s < disc.S; ++s) {
    std::vector<std::pair<Eigen::Index, double>> terms;
    for (std::size_t i = 0; i < disc.n; ++i) { terms.emplace_back(disc.plan_index(s, i), disc.grid().weights[i]); }
    const double K = disc.market.sellers[s].inventory;
    b.row(terms, K, K);
    fs.tags.push_back({RowKind::inventory, s, 0});
  }
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 0; i < disc.n; ++i) {
      const double m = disc.multiplier(s, i, mode);
      std::vector<std::pair<Eigen::Index, double>> terms{{disc.plan_index(s, i), 1.0},
                                                         {disc.price_index(s, i), m * disc.beta[s][i]}};
      for (std::size_t r = 0; r < disc.S; ++r) {
        if (r != s) { terms.emplace_back(disc.price_index(r, i), -m * disc.gamma[s][r][i]); }
      }
      b.row(terms, -qp::inf, m * disc.alpha[s][i]);
      fs.tags.push_back({RowKind::demand, s, i});
    }
  }

  const StrategyProfile seed = prev ? *prev : binding_profile(disc, mode);
  for (const auto& rule : rules) {
    for (auto& row : rule_rows(rule, disc, seed.prices, mode)) {
      const Eigen::Index r = b.row(row.terms, row.lo, row.hi);
      fs.tags.push_back({detail::row_kind(rule.kind), row.seller, row.node});
      if (row.shift_col >= 0) { fs.lagged.push_back({r, row.shift_col, row.base}); }
    }
  }
  fs.system = b.build();

  // Nonemptiness: a strictly interior binding point, else an LP phase 1.
  bool ok = false;
  if (rules.empty()) {
    const auto probe = binding_profile(disc, mode, 1.0 - 1e-6);
    ok = true;
    for (std::size_t s = 0; s < disc.S && ok; ++s) {
      for (std::size_t i = 0; i < disc.n && ok; ++i) {
        const double bound = demand_bound(disc.market, s, probe.prices_at(i), disc.grid().nodes[i], mode);
        ok = probe.plans[s][i] < bound && probe.plans[s][i] > disc.market.sellers[s].d_min;
      }
    }
  }
  if (!ok && !qp::find_feasible_point(fs.system)) { diagnose_infeasible(disc, mode); }
  return fs;
}

}  // namespace dpfi
