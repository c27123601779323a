#pragma once

/**
 * @file
 * @brief Projection fixed-point solver for the market equilibrium and the
 * certificates that go with it (VI gap, best-response check, analytic
 * monopoly solution).
 *
 * The iteration is u <- P[u + a W F(u)] where F is the revenue gradient
 * (exp(-rho t) D on price slots, exp(-rho t) pi on plan slots), W holds the
 * quadrature weights and P is the Euclidean projection onto the shared set.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/model.hpp"
#include "dpfi/qp/projection.hpp"
#include "dpfi/qp/simplex.hpp"
#include "dpfi/rules.hpp"
#include "dpfi/solver/discretize.hpp"
#include "dpfi/solver/feasible_set.hpp"

namespace dpfi {

enum class Representation { grid, poly5 };

inline const char* to_string(Representation r) { return r == Representation::grid ? "grid" : "poly5"; }

inline Representation parse_representation(const std::string& s)
{
  if (s == "grid") { return Representation::grid; }
  if (s == "poly5") { return Representation::poly5; }
  throw ConfigError("unknown representation '" + s + "' (expected grid|poly5)");
}

struct SolverConfig
{
  /// Projection step a; empty selects a curvature-based default.
  std::optional<double> step_alpha;
  double eps1 = 1e-6;
  int max_iters = 20000;
  double qp_tol = 1e-9;
  Representation representation = Representation::grid;
  bool gap_check = true;
  /// Solve the linear complementarity system on the final active set.
  bool active_set_finish = true;
  /// Divergence: step norm grows 10x over this many iterations.
  int divergence_window = 50;
  /// Automatic step halvings allowed after divergence (default step only).
  int max_halvings = 8;

  void validate() const
  {
    if (step_alpha && !(*step_alpha > 0.0 && std::isfinite(*step_alpha))) {
      throw ConfigError("step_alpha must be positive");
    }
    if (!(eps1 > 0.0)) { throw ConfigError("eps1 must be positive"); }
    if (!(qp_tol > 0.0)) { throw ConfigError("qp_tol must be positive"); }
    if (max_iters < 1) { throw ConfigError("max_iters must be >= 1"); }
    if (divergence_window < 1) { throw ConfigError("divergence_window must be >= 1"); }
  }
};

struct BindingReport
{
  /// demand_binds[s][i]: the demand row of seller s is tight at node i.
  std::vector<std::vector<bool>> demand_binds;
  std::vector<std::size_t> price_floor_nodes;  // per seller
  std::vector<std::size_t> price_cap_nodes;
  std::vector<std::size_t> plan_floor_nodes;
  std::size_t rule_rows_binding = 0;
};

struct SolverResult
{
  StrategyProfile profile;
  int iterations = 0;
  std::vector<double> step_norm_trace;
  std::optional<double> vi_gap;
  std::vector<double> revenues;
  qp::Vector row_multipliers;
  qp::Vector bound_multipliers;
  BindingReport binding;
  std::vector<std::string> warnings;
  double step_alpha = 0.0;
  bool finished_by_active_set = false;
  double seconds = 0.0;
};

/// Revenue gradient; no quadrature weights.
inline qp::Vector vi_map(const Discretization& disc, const qp::Vector& u)
{
  if (u.size() != disc.size()) { throw ConfigError("decision vector has wrong length"); }
  qp::Vector F(u.size());
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 0; i < disc.n; ++i) {
      const double e = disc.discount[i];
      F[disc.price_index(s, i)] = e * u[disc.plan_index(s, i)];
      F[disc.plan_index(s, i)] = e * u[disc.price_index(s, i)];
    }
  }
  return F;
}

namespace detail {

inline qp::Vector weighted_map(const Discretization& disc, const qp::Vector& u)
{
  return disc.weights_flat().cwiseProduct(vi_map(disc, u));
}

}  // namespace detail

/**
 * Default step: a w e ~ 0.4 min (beta m)^2 / (beta m + sum gamma m), which
 * keeps the linearized iteration about the binding manifold contractive.
 */
inline double default_step(const Discretization& disc, Mode mode)
{
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 0; i < disc.n; ++i) {
      const double m = disc.multiplier(s, i, mode);
      const double bm = disc.beta[s][i] * m;
      double gm = 0.0;
      for (std::size_t r = 0; r < disc.S; ++r) {
        if (r != s) { gm += std::abs(disc.gamma[s][r][i]) * m; }
      }
      if (bm > 0.0) { c = std::min(c, bm * bm / (bm + gm)); }
    }
  }
  if (!std::isfinite(c)) { c = 1.0; }
  const double emax = *std::max_element(disc.discount.begin(), disc.discount.end());
  return 0.4 * c / (disc.grid().dt() * emax);
}

struct Poly5Fit
{
  /// Monomial coefficients c0..c5 of sum c_k t^k.
  std::array<double, 6> coefficients{};
  std::vector<double> fitted;
};

/// Least-squares quintic in t (fitted on t mapped to [-1, 1] for conditioning).
inline Poly5Fit poly5_fit(const TimeGrid& grid, std::span<const double> values)
{
  if (grid.n < 6) { throw ConfigError("poly5 fit needs at least 6 nodes"); }
  if (values.size() != grid.n) { throw ConfigError("values length does not match grid"); }
  const double mid = 0.5 * (grid.t0 + grid.tf);
  const double half = 0.5 * (grid.tf - grid.t0);
  const auto n = static_cast<Eigen::Index>(grid.n);
  Eigen::MatrixXd V(n, 6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = (grid.nodes[static_cast<std::size_t>(i)] - mid) / half;
    double p = 1.0;
    for (int k = 0; k < 6; ++k) {
      V(i, k) = p;
      p *= x;
    }
    y[i] = values[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
  Poly5Fit out;
  const Eigen::VectorXd f = V * c;
  out.fitted.assign(f.data(), f.data() + f.size());
  // sum_k c_k ((t - mid)/half)^k expanded in powers of t.
  static constexpr int binom[6][6] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}, {1, 5, 10, 10, 5, 1}};
  for (int k = 0; k < 6; ++k) {
    const double ck = c[k] / std::pow(half, k);
    for (int j = 0; j <= k; ++j) {
      out.coefficients[static_cast<std::size_t>(j)] += ck * binom[k][j] * std::pow(-mid, k - j);
    }
  }
  return out;
}

namespace detail {

inline qp::Vector fit_paths(const Discretization& disc, const qp::Vector& v)
{
  qp::Vector out(v.size());
  std::vector<double> buf(disc.n);
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (int kind = 0; kind < 2; ++kind) {
      for (std::size_t i = 0; i < disc.n; ++i) {
        buf[i] = v[kind ? disc.plan_index(s, i) : disc.price_index(s, i)];
      }
      const auto fit = poly5_fit(disc.grid(), buf);
      for (std::size_t i = 0; i < disc.n; ++i) {
        out[kind ? disc.plan_index(s, i) : disc.price_index(s, i)] = fit.fitted[i];
      }
    }
  }
  return out;
}

/**
 * Solves the VI exactly on a fixed active set:
 *   W F(u) = sum_active a_r mu_r,  a_r u = bound_r(u)  (lagged bounds depend on u)
 * and returns u if the multipliers have the right signs and u is feasible.
 */
inline std::optional<qp::Vector> active_set_finish(const Discretization& disc, FeasibleSet set,
                                                   const qp::ProjectionResult& last, double tol)
{
  const auto& C = set.system;
  const Eigen::Index n = C.cols();
  const qp::Vector& u = last.x;
  const qp::Vector ax = C.A * u;
  const qp::Vector rownorm = qp::detail::row_norms(C.A);

  struct Act
  {
    Eigen::Index idx;  // row index, or -1 - column for bounds
    int side;          // +1 upper, -1 lower, 0 equality
    double value;
  };
  std::vector<Act> act;
  auto tight = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); };
  for (Eigen::Index r = 0; r < C.rows(); ++r) {
    const double y = last.row_duals[r];
    if (C.is_equality(r)) {
      act.push_back({r, 0, C.lo[r]});
    } else if (y > 0.0 || (std::isfinite(C.hi[r]) && tight(ax[r] / rownorm[r], C.hi[r] / rownorm[r]))) {
      act.push_back({r, 1, C.hi[r]});
    } else if (y < 0.0 || (std::isfinite(C.lo[r]) && tight(ax[r] / rownorm[r], C.lo[r] / rownorm[r]))) {
      act.push_back({r, -1, C.lo[r]});
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double y = last.bound_duals[j];
    if (C.lb[j] == C.ub[j]) {
      act.push_back({-1 - j, 0, C.lb[j]});
    } else if (y > 0.0 || (std::isfinite(C.ub[j]) && tight(u[j], C.ub[j]))) {
      act.push_back({-1 - j, 1, C.ub[j]});
    } else if (y < 0.0 || (std::isfinite(C.lb[j]) && tight(u[j], C.lb[j]))) {
      act.push_back({-1 - j, -1, C.lb[j]});
    }
  }
  const auto k = static_cast<Eigen::Index>(act.size());
  const Eigen::MatrixXd A = Eigen::MatrixXd(C.A);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(C.rows(), n);
  qp::Vector base = C.lo;
  for (const auto& l : set.lagged) {
    R(l.row, l.shift_col) = 1.0;
    base[l.row] = l.base;
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
  qp::Vector rhs = qp::Vector::Zero(n + k);
  const qp::Vector w = disc.weights_flat();
  for (std::size_t s = 0; s < disc.S; ++s) {
    for (std::size_t i = 0; i < disc.n; ++i) {
      const double we = disc.grid().weights[i] * disc.discount[i];
      K(disc.price_index(s, i), disc.plan_index(s, i)) = we;
      K(disc.plan_index(s, i), disc.price_index(s, i)) = we;
    }
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto& c = act[static_cast<std::size_t>(a)];
    if (c.idx >= 0) {
      K.block(0, n + a, n, 1) = -A.row(c.idx).transpose();
      K.block(n + a, 0, 1, n) = A.row(c.idx) - R.row(c.idx);
      const bool lag = R.row(c.idx).cwiseAbs().sum() > 0.0;
      rhs[n + a] = lag ? base[c.idx] : c.value;
    } else {
      const Eigen::Index j = -1 - c.idx;
      K(j, n + a) = -1.0;
      K(n + a, j) = 1.0;
      rhs[n + a] = c.value;
    }
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const qp::Vector sol = lu.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
    return std::nullopt;
  }
  const qp::Vector x = sol.head(n);
  const double mscale = 1e-8 * (1.0 + sol.tail(k).lpNorm<Eigen::Infinity>());
  for (Eigen::Index a = 0; a < k; ++a) {
    const int side = act[static_cast<std::size_t>(a)].side;
    const double mu = sol[n + a];
    if ((side > 0 && mu < -mscale) || (side < 0 && mu > mscale)) { return std::nullopt; }
  }
  set.update_lag(x);
  const qp::Vector nrm = qp::detail::row_norms(C.A);
  const qp::Vector axn = set.system.A * x;
  double viol = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    viol = std::max({viol, set.system.lb[j] - x[j], x[j] - set.system.ub[j]});
  }
  for (Eigen::Index r = 0; r < C.rows(); ++r) {
    viol = std::max({viol, (set.system.lo[r] - axn[r]) / nrm[r], (axn[r] - set.system.hi[r]) / nrm[r]});
  }
  if (viol > tol) { return std::nullopt; }
  return x;
}

inline BindingReport binding_report(const Discretization& disc, const FeasibleSet& set, const qp::Vector& u,
                                    double tol)
{
  BindingReport b;
  b.demand_binds.assign(disc.S, std::vector<bool>(disc.n, false));
  b.price_floor_nodes.assign(disc.S, 0);
  b.price_cap_nodes.assign(disc.S, 0);
  b.plan_floor_nodes.assign(disc.S, 0);
  const qp::Vector ax = set.system.A * u;
  const qp::Vector nrm = qp::detail::row_norms(set.system.A);
  for (Eigen::Index r = 0; r < set.system.rows(); ++r) {
    const auto& tag = set.tags[static_cast<std::size_t>(r)];
    const double slack = std::min(set.system.hi[r] - ax[r], ax[r] - set.system.lo[r]) / nrm[r];
    const bool binds = slack <= tol * (1.0 + std::abs(set.system.hi[r]) / nrm[r]);
    if (tag.kind == RowKind::demand) {
      b.demand_binds[tag.seller][tag.node] = binds;
    } else if (tag.kind != RowKind::inventory && binds) {
      ++b.rule_rows_binding;
    }
  }
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto& sp = disc.market.sellers[s];
    for (std::size_t i = 0; i < disc.n; ++i) {
      const double p = u[disc.price_index(s, i)];
      const double d = u[disc.plan_index(s, i)];
      if (p <= sp.pi_min + tol * (1.0 + sp.pi_min)) { ++b.price_floor_nodes[s]; }
      if (p >= sp.pi_max - tol * (1.0 + sp.pi_max)) { ++b.price_cap_nodes[s]; }
      if (d <= sp.d_min * (1.0 + 1e-6)) { ++b.plan_floor_nodes[s]; }
    }
  }
  return b;
}

}  // namespace detail

/// Binding initial iterate, projected once onto the set.
inline qp::Vector initial_iterate(const Discretization& disc, FeasibleSet& set, qp::Projector& proj)
{
  const qp::Vector u = disc.to_flat(binding_profile(disc, set.mode));
  set.update_lag(u);
  return proj.project(set.system, u).x;
}

/**
 * Runs the fixed-point iteration from u0 (or the binding initial iterate).
 * Throws DivergenceError when the step norm grows tenfold over the
 * divergence window and ConvergenceError when max_iters is exhausted.
 */
inline SolverResult fixed_point_solve(const Discretization& disc, FeasibleSet set, const SolverConfig& cfg,
                                      const std::optional<qp::Vector>& u0 = std::nullopt)
{
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  qp::ProjectionSettings ps;
  ps.tol = cfg.qp_tol;
  qp::Projector proj(ps);
  const double a = cfg.step_alpha ? *cfg.step_alpha : default_step(disc, set.mode);
  const bool poly = cfg.representation == Representation::poly5;

  qp::Vector u = u0 ? *u0 : initial_iterate(disc, set, proj);
  if (u.size() != disc.size()) { throw ConfigError("initial iterate has wrong length"); }

  SolverResult res;
  res.step_alpha = a;
  qp::ProjectionResult last;
  qp::Vector v;
  bool converged = false;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    set.update_lag(u);
    try {
      last = proj.project(set.system, u + a * detail::weighted_map(disc, u));
    } catch (const qp::ProjectionError&) {
      if (set.has_lag() && !qp::find_feasible_point(set.system)) {
        throw InfeasibleError("pricing-rule rows with the lag taken from iteration " + std::to_string(k - 1) +
                                  " admit no strategy; the implicit-lag iteration cannot continue",
                              -1, -1);
      }
      throw;
    }
    v = last.x;
    const qp::Vector next = poly ? detail::fit_paths(disc, v) : v;
    const double step = (next - u).norm();
    res.step_norm_trace.push_back(step);
    res.iterations = k;
    const auto w = static_cast<std::size_t>(cfg.divergence_window);
    if (!std::isfinite(step) || (res.step_norm_trace.size() > w &&
                                 step > 10.0 * res.step_norm_trace[res.step_norm_trace.size() - 1 - w] &&
                                 step > cfg.eps1)) {
      std::ostringstream os;
      os << "fixed-point iteration diverged at iteration " << k << " with step_alpha = " << a
         << "; try a smaller step_alpha";
      throw DivergenceError(os.str(), res.step_norm_trace);
    }
    u = next;
    if (step <= cfg.eps1) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "fixed-point iteration did not reach eps1 = " << cfg.eps1 << " in " << cfg.max_iters
       << " iterations (last step " << res.step_norm_trace.back() << ")";
    throw ConvergenceError(os.str(), res.step_norm_trace);
  }

  qp::Vector sol = poly ? v : u;
  if (!poly && cfg.active_set_finish) {
    if (auto x = detail::active_set_finish(disc, set, last, cfg.qp_tol)) {
      set.update_lag(*x);
      const auto check = proj.project(set.system, *x + a * detail::weighted_map(disc, *x));
      if ((check.x - *x).norm() <= cfg.eps1) {
        sol = *x;
        last = check;
        res.finished_by_active_set = true;
      }
    }
  }
  set.update_lag(sol);
  res.profile = disc.to_profile(sol);
  res.revenues = discounted_revenue(disc.market, res.profile);
  res.row_multipliers = last.row_duals;
  res.bound_multipliers = last.bound_duals;
  res.binding = detail::binding_report(disc, set, sol, 1e-7);
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto& id = disc.market.sellers[s].id;
    if (res.binding.price_floor_nodes[s] > 0) {
      res.warnings.push_back("seller " + id + ": price floor binds at " +
                             std::to_string(res.binding.price_floor_nodes[s]) + " node(s)");
    }
    if (res.binding.price_cap_nodes[s] > 0) {
      res.warnings.push_back("seller " + id + ": price cap binds at " + std::to_string(res.binding.price_cap_nodes[s]) +
                             " node(s)");
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

/// max over the set of <W F(u), v - u>; nonnegative up to LP tolerance.
inline double vi_gap(const Discretization& disc, FeasibleSet set, const qp::Vector& u)
{
  set.update_lag(u);
  const qp::Vector c = detail::weighted_map(disc, u);
  const auto lp = qp::maximize(set.system, c);
  return lp.objective - c.dot(u);
}

struct BestResponse
{
  std::vector<double> prices;
  std::vector<double> plans;
  double objective = 0.0;
  std::vector<double> trace;
};

namespace detail {

/**
 * Seller s's problem with competitor paths frozen.  Competitors' demand rows
 * are shared constraints: with their plans fixed they put a floor under
 * pi_s wherever gamma_rs > 0.
 */
struct OwnProblem
{
  std::size_t n = 0;
  std::vector<double> w;     // quadrature weights
  std::vector<double> e;     // discount factors
  std::vector<double> c;     // alpha + sum gamma pi_r
  std::vector<double> beta;
  std::vector<double> m;
  std::vector<double> floor;  // pi_min raised by competitors' rows
  double K = 0.0, pmax = 0.0, dmin = 0.0;

  OwnProblem(const Discretization& disc, std::size_t s, const StrategyProfile& fixed, Mode mode)
      : n(disc.n), w(disc.grid().weights), e(disc.discount)
  {
    const auto& sp = disc.market.sellers[s];
    K = sp.inventory;
    pmax = sp.pi_max;
    dmin = sp.d_min;
    c.resize(n);
    beta = disc.beta[s];
    m.resize(n);
    floor.assign(n, sp.pi_min);
    for (std::size_t i = 0; i < n; ++i) {
      double v = disc.alpha[s][i];
      for (std::size_t r = 0; r < disc.S; ++r) {
        if (r != s) { v += disc.gamma[s][r][i] * fixed.prices[r][i]; }
      }
      c[i] = v;
      m[i] = disc.multiplier(s, i, mode);
      for (std::size_t r = 0; r < disc.S; ++r) {
        const double g = r == s ? 0.0 : disc.gamma[r][s][i];
        if (!(g > 0.0)) { continue; }
        // D_r <= m_r (alpha_r - beta_r pi_r + sum_q gamma_rq pi_q), solved for pi_s
        double rest = disc.alpha[r][i] - disc.beta[r][i] * fixed.prices[r][i];
        for (std::size_t q = 0; q < disc.S; ++q) {
          if (q != r && q != s) { rest += disc.gamma[r][q][i] * fixed.prices[q][i]; }
        }
        const double need = (fixed.plans[r][i] / disc.multiplier(r, i, mode) - rest) / g;
        floor[i] = std::max(floor[i], need);
      }
    }
  }

  double bound(std::size_t i, double p) const { return m[i] * (c[i] - beta[i] * p); }

  double objective(const std::vector<double>& p, const std::vector<double>& d) const
  {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) { v += w[i] * e[i] * p[i] * d[i]; }
    return v;
  }

  /// Best plans for fixed prices: LP over plan floor, demand bound and inventory.
  std::optional<std::vector<double>> plans_given(const std::vector<double>& p) const
  {
    qp::ConstraintBuilder b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double ub = bound(i, p[i]);
      if (ub < dmin - 1e-9 * (1.0 + std::abs(m[i] * c[i]))) { return std::nullopt; }
      b.bound(static_cast<Eigen::Index>(i), dmin, std::max(ub, dmin));
    }
    std::vector<std::pair<Eigen::Index, double>> terms;
    for (std::size_t i = 0; i < n; ++i) { terms.emplace_back(static_cast<Eigen::Index>(i), w[i]); }
    b.row(terms, K, K);
    qp::Vector cost(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) { cost[static_cast<Eigen::Index>(i)] = w[i] * e[i] * p[i]; }
    try {
      const auto r = qp::maximize(b.build(), cost);
      return std::vector<double>(r.x.data(), r.x.data() + r.x.size());
    } catch (const qp::LpError&) {
      return std::nullopt;
    }
  }

  /// Best prices for fixed plans (a separable LP): each price rises to its binding value or the cap.
  std::optional<std::vector<double>> prices_given(const std::vector<double>& d) const
  {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = (c[i] - d[i] / m[i]) / beta[i];
      if (hi < floor[i] - 1e-12 * (1.0 + std::abs(floor[i]))) { return std::nullopt; }
      p[i] = std::max(floor[i], std::min(pmax, hi));
    }
    return p;
  }

  /**
   * With D = m (c - beta pi) the objective is separable and concave in pi
   * under one inventory equality; stationarity gives
   * pi_i(lambda) = clamp(c_i / (2 beta_i) + lambda / (2 e_i)), and lambda is
   * found by bisection on the inventory.
   */
  std::optional<std::vector<double>> binding_prices() const
  {
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      hi[i] = std::min(pmax, (c[i] - dmin / m[i]) / beta[i]);
      if (hi[i] < floor[i]) { return std::nullopt; }
    }
    auto price = [&](double lam, std::size_t i) {
      return std::clamp(0.5 * c[i] / beta[i] + 0.5 * lam / e[i], floor[i], hi[i]);
    };
    auto sold = [&](double lam) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) { v += w[i] * bound(i, price(lam, i)); }
      return v;
    };
    double lo = -1.0, up = 1.0;
    while (sold(lo) < K) {
      lo *= 2.0;
      if (lo < -1e12) { return std::nullopt; }
    }
    while (sold(up) > K) {
      up *= 2.0;
      if (up > 1e12) { return std::nullopt; }
    }
    for (int it = 0; it < 200 && up - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + up);
      (sold(mid) > K ? lo : up) = mid;
    }
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) { p[i] = price(0.5 * (lo + up), i); }
    return p;
  }
};

}  // namespace detail

/**
 * Seller s's best response to the frozen competitor prices of `fixed`:
 * alternating LPs (plans given prices, prices given plans) from three starts
 * (the fixed path, a flat plan with binding prices, the binding-reduction
 * optimum); the best stationary value is returned.  Competitors' demand rows
 * are respected; pricing-rule rows are not imposed.
 */
inline BestResponse best_response(const Discretization& disc, std::size_t s, const StrategyProfile& fixed, Mode mode,
                                  double tol = 1e-10, int max_rounds = 500)
{
  if (s >= disc.S) { throw ConfigError("unknown seller index"); }
  detail::check_shape(disc.market, fixed);
  const detail::OwnProblem prob(disc, s, fixed, mode);

  std::vector<std::vector<double>> starts;
  starts.push_back(fixed.prices[s]);
  {
    std::vector<double> flat(disc.n, prob.K / disc.grid().length());
    if (auto p = prob.prices_given(flat)) { starts.push_back(*p); }
  }
  if (auto p = prob.binding_prices()) { starts.push_back(*p); }

  BestResponse best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& p0 : starts) {
    std::vector<double> p = p0;
    auto d = prob.plans_given(p);
    if (!d) { continue; }
    double val = prob.objective(p, *d);
    std::vector<double> trace{val};
    for (int round = 0; round < max_rounds; ++round) {
      auto np = prob.prices_given(*d);
      if (!np) { break; }
      auto nd = prob.plans_given(*np);
      if (!nd) { break; }
      const double nv = prob.objective(*np, *nd);
      if (nv < val) { break; }
      const bool done = nv - val <= tol * (1.0 + std::abs(val));
      p = *np;
      d = nd;
      val = nv;
      trace.push_back(val);
      if (done) { break; }
    }
    any = true;
    if (val > best.objective) {
      best.objective = val;
      best.prices = p;
      best.plans = *d;
      best.trace = trace;
    }
  }
  if (!any) { throw ConvergenceError("best response: no feasible start for seller " + disc.market.sellers[s].id, {}); }
  return best;
}

/// Relative revenue gain each seller could get by deviating alone.
inline std::vector<double> best_response_improvement(const Discretization& disc, const StrategyProfile& prof, Mode mode)
{
  const auto rev = discounted_revenue(disc.market, prof);
  std::vector<double> out(disc.S);
  for (std::size_t s = 0; s < disc.S; ++s) {
    const auto br = best_response(disc, s, prof, mode);
    out[s] = (br.objective - rev[s]) / std::max(std::abs(rev[s]), 1e-300);
  }
  return out;
}

struct MonopolySolution
{
  double price;
  double plan;
};

/**
 * Constant-coefficient single seller with rho = 0: the demand row binds and a
 * flat plan K/T maximizes the concave revenue, so price = (alpha - plan/m)/beta.
 */
inline MonopolySolution analytic_single_seller(double alpha, double beta, double xi0_minus_tau, double K, double T)
{
  if (!(alpha > 0.0 && beta > 0.0 && xi0_minus_tau > 0.0 && K > 0.0 && T > 0.0)) {
    throw ConfigError("analytic single seller needs positive alpha, beta, multiplier, K and T");
  }
  const double plan = K / T;
  const double price = (alpha - plan / xi0_minus_tau) / beta;
  if (!(price > 0.0)) { throw ConfigError("inventory too large for an interior price"); }
  return {price, plan};
}

/**
 * discretize + build set + fixed point (+ VI gap).  With the default step the
 * run restarts at half the step after a divergence.
 */
inline SolverResult solve_equilibrium(const MarketSpec& market, Mode mode, const std::vector<PricingRule>& rules,
                                      const SolverConfig& cfg)
{
  cfg.validate();
  const auto disc = discretize(market);
  const auto set = build_feasible_set(disc, mode, rules);
  SolverConfig run = cfg;
  double a = cfg.step_alpha ? *cfg.step_alpha : default_step(disc, mode);
  for (int attempt = 0;; ++attempt) {
    run.step_alpha = a;
    try {
      auto res = fixed_point_solve(disc, set, run);
      if (cfg.gap_check) { res.vi_gap = vi_gap(disc, set, disc.to_flat(res.profile)); }
      if (attempt > 0) {
        std::ostringstream os;
        os << "step halved " << attempt << " time(s) after divergence; final step_alpha = " << a;
        res.warnings.push_back(os.str());
      }
      return res;
    } catch (const DivergenceError&) {
      if (cfg.step_alpha || attempt >= cfg.max_halvings) { throw; }
      a *= 0.5;
    }
  }
}

}  // namespace dpfi
