#pragma once

/**
 * @file
 * @brief Dense bounded-variable primal simplex for the small linear programs
 * that certify equilibria (VI gap, best-response steps, phase-1 feasibility).
 *
 * Rows are turned into equalities A x - s = 0 with bounded slacks s; phase 1
 * adds one artificial per row that is violated at the starting point.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/qp/constraint_system.hpp"

namespace dpfi::qp {

class LpError : public Error
{
 public:
  enum class Kind { infeasible, unbounded, iteration_limit };
  LpError(const std::string& what, Kind k) : Error(what), kind_(k) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct LpResult
{
  Vector x;
  double objective = 0.0;
  int iterations = 0;
};

namespace detail {

class DenseSimplex
{
 public:
  DenseSimplex(const ConstraintSystem& c, int max_iterations) : max_iter_(max_iterations)
  {
    n_ = c.cols();
    m_ = c.rows();
    N_ = n_ + 2 * m_;
    M_ = Eigen::MatrixXd::Zero(m_, N_);
    lb_.resize(N_);
    ub_.resize(N_);
    val_ = Vector::Zero(N_);
    const Eigen::MatrixXd A = Eigen::MatrixXd(c.A);
    Vector lo = c.lo, hi = c.hi;
    for (Eigen::Index i = 0; i < m_; ++i) {
      double nrm = A.row(i).norm();
      if (nrm == 0.0) {
        if (lo[i] > 1e-12 || hi[i] < -1e-12) { throw LpError("empty constraint row cannot be satisfied", LpError::Kind::infeasible); }
        nrm = 1.0;
      }
      M_.row(i).head(n_) = A.row(i) / nrm;
      lo[i] /= nrm;
      hi[i] /= nrm;
    }
    lb_.head(n_) = c.lb;
    ub_.head(n_) = c.ub;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (lb_[j] > ub_[j]) { throw LpError("variable bounds are inconsistent", LpError::Kind::infeasible); }
      val_[j] = std::clamp(0.0, lb_[j], ub_[j]);
    }
    basis_.assign(static_cast<std::size_t>(m_), 0);
    is_basic_.assign(static_cast<std::size_t>(N_), 0);
    const Vector r = M_.leftCols(n_) * val_.head(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index s = n_ + i;
      const Eigen::Index a = n_ + m_ + i;
      M_(i, s) = -1.0;
      lb_[s] = lo[i];
      ub_[s] = hi[i];
      if (lo[i] > hi[i]) { throw LpError("row bounds are inconsistent", LpError::Kind::infeasible); }
      if (r[i] >= lo[i] && r[i] <= hi[i]) {
        M_(i, a) = 1.0;
        lb_[a] = 0.0;
        ub_[a] = 0.0;
        set_basic(i, s);
      } else {
        const double v = r[i] < lo[i] ? lo[i] : hi[i];
        val_[s] = v;
        M_(i, a) = v > r[i] ? 1.0 : -1.0;
        lb_[a] = 0.0;
        ub_[a] = std::numeric_limits<double>::infinity();
        set_basic(i, a);
        needs_phase1_ = true;
      }
    }
    refactor();
  }

  LpResult run(const Vector& cost_min)
  {
    if (needs_phase1_) {
      Vector c1 = Vector::Zero(N_);
      c1.tail(m_).setOnes();
      iterate(c1);
      compute_basics();
      double infeas = 0.0;
      for (Eigen::Index j = n_ + m_; j < N_; ++j) { infeas += value(j); }
      if (infeas > 1e-8 * (1.0 + scale())) { throw LpError("linear program is infeasible", LpError::Kind::infeasible); }
    }
    for (Eigen::Index j = n_ + m_; j < N_; ++j) { ub_[j] = 0.0; }
    if (cost_min.size() == 0) { return extract(Vector::Zero(n_)); }
    Vector c2 = Vector::Zero(N_);
    c2.head(n_) = cost_min;
    iterate(c2);
    return extract(cost_min);
  }

 private:
  void set_basic(Eigen::Index row, Eigen::Index j)
  {
    basis_[static_cast<std::size_t>(row)] = j;
    is_basic_[static_cast<std::size_t>(j)] = 1;
  }

  double value(Eigen::Index j) const
  {
    if (is_basic_[static_cast<std::size_t>(j)]) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (basis_[static_cast<std::size_t>(i)] == j) { return xB_[i]; }
      }
    }
    return val_[j];
  }

  double scale() const { return val_.head(n_).lpNorm<Eigen::Infinity>(); }

  void refactor()
  {
    Eigen::MatrixXd B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) { B.col(i) = M_.col(basis_[static_cast<std::size_t>(i)]); }
    Binv_ = B.partialPivLu().inverse();
    since_refactor_ = 0;
  }

  void compute_basics()
  {
    Vector rhs = Vector::Zero(m_);
    for (Eigen::Index j = 0; j < N_; ++j) {
      if (!is_basic_[static_cast<std::size_t>(j)] && val_[j] != 0.0) { rhs -= M_.col(j) * val_[j]; }
    }
    xB_ = Binv_ * rhs;
  }

  void iterate(const Vector& cost)
  {
    const double dtol = 1e-9 * (1.0 + cost.lpNorm<Eigen::Infinity>());
    constexpr double ptol = 1e-9;
    constexpr double ftol = 1e-9;
    int degenerate = 0;
    for (;;) {
      if (++iters_ > max_iter_) { throw LpError("simplex iteration limit reached", LpError::Kind::iteration_limit); }
      if (since_refactor_ >= 64) { refactor(); }
      compute_basics();
      Vector cB(m_);
      for (Eigen::Index i = 0; i < m_; ++i) { cB[i] = cost[basis_[static_cast<std::size_t>(i)]]; }
      const Eigen::RowVectorXd y = cB.transpose() * Binv_;
      const bool bland = degenerate > 50;

      Eigen::Index enter = -1;
      double best = 0.0;
      int dir = 0;
      for (Eigen::Index j = 0; j < N_; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)] || lb_[j] == ub_[j]) { continue; }
        const double d = cost[j] - y.dot(M_.col(j));
        int s = 0;
        if (d < -dtol && val_[j] < ub_[j]) {
          s = 1;
        } else if (d > dtol && val_[j] > lb_[j]) {
          s = -1;
        }
        if (s == 0) { continue; }
        if (bland) {
          enter = j;
          dir = s;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = s;
        }
      }
      if (enter < 0) { return; }

      const Vector alpha = Binv_ * M_.col(enter);
      // Harris pass 1: largest step with bounds relaxed by ftol.
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
        if (a > ptol && std::isfinite(lb_[b])) {
          theta = std::min(theta, (xB_[i] - lb_[b] + ftol) / a);
        } else if (a < -ptol && std::isfinite(ub_[b])) {
          theta = std::min(theta, (ub_[b] - xB_[i] + ftol) / -a);
        }
      }
      Eigen::Index leave = -1;
      double step = std::numeric_limits<double>::infinity();
      double piv = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
        double ratio;
        if (a > ptol && std::isfinite(lb_[b])) {
          ratio = (xB_[i] - lb_[b]) / a;
        } else if (a < -ptol && std::isfinite(ub_[b])) {
          ratio = (ub_[b] - xB_[i]) / -a;
        } else {
          continue;
        }
        if (ratio > theta) { continue; }
        const bool better = bland ? (leave < 0 || b < basis_[static_cast<std::size_t>(leave)]) : std::abs(a) > piv;
        if (better) {
          leave = i;
          piv = std::abs(a);
          step = std::max(ratio, 0.0);
        }
      }
      const double range = ub_[enter] - lb_[enter];
      if (leave < 0 && !std::isfinite(range)) {
        throw LpError("linear program is unbounded", LpError::Kind::unbounded);
      }
      if (leave < 0 || range <= step) {
        // Bound flip; the basis is unchanged.
        val_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
        degenerate = 0;
        continue;
      }
      degenerate = step < 1e-12 ? degenerate + 1 : 0;
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      const double a = dir * alpha[leave];
      val_[out] = a > 0.0 ? lb_[out] : ub_[out];
      is_basic_[static_cast<std::size_t>(out)] = 0;
      val_[enter] += dir * step;
      set_basic(leave, enter);
      val_[enter] = 0.0;
      // Product-form update of the explicit inverse.
      const double p = alpha[leave];
      Binv_.row(leave) /= p;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (i != leave && alpha[i] != 0.0) { Binv_.row(i) -= alpha[i] * Binv_.row(leave); }
      }
      ++since_refactor_;
    }
  }

  LpResult extract(const Vector& cost_min)
  {
    compute_basics();
    Vector x = val_.head(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < n_) { x[b] = xB_[i]; }
    }
    x = x.cwiseMax(lb_.head(n_)).cwiseMin(ub_.head(n_));
    return {x, cost_min.dot(x), iters_};
  }

  int max_iter_;
  Eigen::Index n_ = 0, m_ = 0, N_ = 0;
  Eigen::MatrixXd M_;
  Vector lb_, ub_, val_, xB_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> is_basic_;
  Eigen::MatrixXd Binv_;
  int since_refactor_ = 0;
  int iters_ = 0;
  bool needs_phase1_ = false;
};

}  // namespace detail

/// max cost.x over the polyhedron.
inline LpResult maximize(const ConstraintSystem& c, const Vector& cost, int max_iterations = 100000)
{
  if (cost.size() != c.cols()) { throw ConfigError("LP cost has wrong dimension"); }
  detail::DenseSimplex lp(c, max_iterations);
  LpResult r = lp.run(-cost);
  r.objective = cost.dot(r.x);
  return r;
}

inline LpResult minimize(const ConstraintSystem& c, const Vector& cost, int max_iterations = 100000)
{
  if (cost.size() != c.cols()) { throw ConfigError("LP cost has wrong dimension"); }
  detail::DenseSimplex lp(c, max_iterations);
  return lp.run(cost);
}

/// Phase 1 only; nullopt when the polyhedron is empty.
inline std::optional<Vector> find_feasible_point(const ConstraintSystem& c, int max_iterations = 100000)
{
  try {
    detail::DenseSimplex lp(c, max_iterations);
    return lp.run(Vector()).x;
  } catch (const LpError& e) {
    if (e.kind() == LpError::Kind::infeasible) { return std::nullopt; }
    throw;
  }
}

}  // namespace dpfi::qp
