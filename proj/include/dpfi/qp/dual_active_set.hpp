#pragma once

/**
 * @file
 * @brief Dual active-set projection (Goldfarb-Idnani with identity Hessian).
 *
 * Exact in finitely many steps and insensitive to how thin the polyhedron
 * is, which makes it the fallback for projections where operator splitting
 * crawls.  Dense: memory is O(n^2) in the number of variables.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/qp/constraint_system.hpp"

namespace dpfi::qp {

struct DualActiveSetResult
{
  Vector x;
  Vector row_duals;    // positive: upper side active
  Vector bound_duals;  // same convention
  int steps = 0;
};

namespace detail {

class GoldfarbIdnani
{
 public:
  GoldfarbIdnani(const ConstraintSystem& c, const Vector& p) : c_(c), n_(c.cols())
  {
    norms_ = Vector::Ones(c.rows());
    for (Eigen::Index i = 0; i < c.A.outerSize(); ++i) {
      double s = 0.0;
      for (RowMatrix::InnerIterator it(c.A, i); it; ++it) { s += it.value() * it.value(); }
      if (s > 0.0) { norms_[i] = std::sqrt(s); }
    }
    // Constraints n.x >= b: rows first, then bounds; +1 lower side, -1 upper side.
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (c.lo[i] == c.hi[i]) {
        cons_.push_back({i, false, 1, true});
      } else {
        if (std::isfinite(c.lo[i])) { cons_.push_back({i, false, 1, false}); }
        if (std::isfinite(c.hi[i])) { cons_.push_back({i, false, -1, false}); }
      }
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (c.lb[j] == c.ub[j]) {
        cons_.push_back({j, true, 1, true});
      } else {
        if (std::isfinite(c.lb[j])) { cons_.push_back({j, true, 1, false}); }
        if (std::isfinite(c.ub[j])) { cons_.push_back({j, true, -1, false}); }
      }
    }
    x_ = p;
    J_ = Eigen::MatrixXd::Identity(n_, n_);
    R_ = Eigen::MatrixXd::Zero(n_, n_);
    tol_ = 1e-12 * (1.0 + p.lpNorm<Eigen::Infinity>());
  }

  DualActiveSetResult solve(int max_steps)
  {
    for (std::size_t k = 0; k < cons_.size(); ++k) {
      if (!cons_[k].eq) { continue; }
      if (slack(k) > 0.0) { cons_[k].sign = -cons_[k].sign; }
      add(k, max_steps);
    }
    for (;;) {
      std::size_t worst = cons_.size();
      double smin = -tol_;
      ax_ = c_.A * x_;
      for (std::size_t k = 0; k < cons_.size(); ++k) {
        if (cons_[k].eq || cons_[k].active) { continue; }
        const double s = slack_cached(k);
        if (s < smin) {
          smin = s;
          worst = k;
        }
      }
      if (worst == cons_.size()) { break; }
      add(worst, max_steps);
    }
    DualActiveSetResult out;
    out.x = x_;
    out.row_duals = Vector::Zero(c_.rows());
    out.bound_duals = Vector::Zero(n_);
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const auto& cn = cons_[active_[a]];
      // x - p = sum u n  <=>  x - p + A^T y = 0 with y = -sign * u (per unit row).
      if (cn.bound) {
        out.bound_duals[cn.index] += -cn.sign * u_[a];
      } else {
        out.row_duals[cn.index] += -cn.sign * u_[a] / norms_[cn.index];
      }
    }
    out.steps = steps_;
    return out;
  }

 private:
  struct Con
  {
    Eigen::Index index;
    bool bound;
    int sign;
    bool eq;
    bool active = false;
  };

  double rhs(std::size_t k) const
  {
    const auto& cn = cons_[k];
    if (cn.bound) { return cn.sign > 0 ? c_.lb[cn.index] : -c_.ub[cn.index]; }
    return (cn.sign > 0 ? c_.lo[cn.index] : -c_.hi[cn.index]) / norms_[cn.index];
  }

  double value(std::size_t k, double raw) const
  {
    const auto& cn = cons_[k];
    return cn.bound ? cn.sign * raw : cn.sign * raw / norms_[cn.index];
  }

  double slack(std::size_t k) const
  {
    const auto& cn = cons_[k];
    const double raw = cn.bound ? x_[cn.index] : c_.A.row(cn.index).dot(x_);
    return value(k, raw) - rhs(k);
  }

  double slack_cached(std::size_t k) const
  {
    const auto& cn = cons_[k];
    return value(k, cn.bound ? x_[cn.index] : ax_[cn.index]) - rhs(k);
  }

  /// J^T n for constraint k.
  Vector jt_normal(std::size_t k) const
  {
    const auto& cn = cons_[k];
    if (cn.bound) { return cn.sign * J_.row(cn.index).transpose(); }
    Vector d = Vector::Zero(n_);
    const double f = cn.sign / norms_[cn.index];
    for (RowMatrix::InnerIterator it(c_.A, cn.index); it; ++it) { d += (f * it.value()) * J_.row(it.col()).transpose(); }
    return d;
  }

  double normal_dot(std::size_t k, const Vector& z) const
  {
    const auto& cn = cons_[k];
    if (cn.bound) { return cn.sign * z[cn.index]; }
    return cn.sign * c_.A.row(cn.index).dot(z) / norms_[cn.index];
  }

  static void givens(double a, double b, double& c, double& s)
  {
    const double h = std::hypot(a, b);
    if (h == 0.0) {
      c = 1.0;
      s = 0.0;
    } else {
      c = a / h;
      s = b / h;
    }
  }

  void rotate_j(Eigen::Index i, Eigen::Index j, double c, double s)
  {
    for (Eigen::Index r = 0; r < n_; ++r) {
      const double a = J_(r, i), b = J_(r, j);
      J_(r, i) = c * a + s * b;
      J_(r, j) = -s * a + c * b;
    }
  }

  /// Makes constraint k active, dropping blocking constraints on the way.
  void add(std::size_t k, int max_steps)
  {
    double u_plus = 0.0;
    for (;;) {
      if (++steps_ > max_steps) { throw Error("dual active-set projection exceeded its step budget"); }
      const auto q = static_cast<Eigen::Index>(active_.size());
      Vector d = jt_normal(k);
      const Vector z = J_.rightCols(n_ - q) * d.tail(n_ - q);
      Vector r(q);
      for (Eigen::Index i = q - 1; i >= 0; --i) {
        double v = d[i];
        for (Eigen::Index j = i + 1; j < q; ++j) { v -= R_(i, j) * r[j]; }
        r[i] = v / R_(i, i);
      }
      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index drop_at = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (cons_[active_[static_cast<std::size_t>(j)]].eq || !(r[j] > 0.0)) { continue; }
        const double t = u_[static_cast<std::size_t>(j)] / r[j];
        if (t < t1) {
          t1 = t;
          drop_at = j;
        }
      }
      const double s = slack(k);
      const double zn = normal_dot(k, z);
      const bool dependent = !(z.norm() > 1e-12 * (1.0 + d.norm())) || !(zn > 0.0);
      double t2 = dependent ? std::numeric_limits<double>::infinity() : -s / zn;
      if (cons_[k].eq && t2 < 0.0) { t2 = 0.0; }
      if (dependent && std::abs(s) <= tol_ && (cons_[k].eq || drop_at < 0)) {
        // Redundant with the active set at the current point.
        return;
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw InfeasibleError("projection target set is empty (dual active-set step is unbounded)", -1, -1);
      }
      for (Eigen::Index j = 0; j < q; ++j) { u_[static_cast<std::size_t>(j)] -= t * r[j]; }
      u_plus += t;
      if (!dependent) { x_ += t * z; }
      if (!dependent && t2 <= t1) {
        // Append: rotate d so only its first q + 1 entries survive.
        for (Eigen::Index i = n_ - 1; i > q; --i) {
          double cs, sn;
          givens(d[i - 1], d[i], cs, sn);
          if (sn == 0.0) { continue; }
          d[i - 1] = cs * d[i - 1] + sn * d[i];
          d[i] = 0.0;
          rotate_j(i - 1, i, cs, sn);
        }
        R_.col(q).head(q + 1) = d.head(q + 1);
        active_.push_back(k);
        u_.push_back(u_plus);
        cons_[k].active = true;
        return;
      }
      drop(drop_at);
    }
  }

  void drop(Eigen::Index l)
  {
    const auto q = static_cast<Eigen::Index>(active_.size());
    cons_[active_[static_cast<std::size_t>(l)]].active = false;
    active_.erase(active_.begin() + l);
    u_.erase(u_.begin() + l);
    for (Eigen::Index j = l; j + 1 < q; ++j) { R_.col(j).head(q) = R_.col(j + 1).head(q); }
    R_.col(q - 1).setZero();
    for (Eigen::Index j = l; j + 1 < q; ++j) {
      double cs, sn;
      givens(R_(j, j), R_(j + 1, j), cs, sn);
      for (Eigen::Index col = j; col + 1 < q; ++col) {
        const double a = R_(j, col), b = R_(j + 1, col);
        R_(j, col) = cs * a + sn * b;
        R_(j + 1, col) = -sn * a + cs * b;
      }
      R_(j + 1, j) = 0.0;
      rotate_j(j, j + 1, cs, sn);
    }
  }

  const ConstraintSystem& c_;
  Eigen::Index n_;
  Vector norms_;
  std::vector<Con> cons_;
  Vector x_, ax_;
  Eigen::MatrixXd J_, R_;
  std::vector<std::size_t> active_;
  std::vector<double> u_;
  double tol_;
  int steps_ = 0;
};

}  // namespace detail

/// Projection of p onto c by the dual active-set method.
inline DualActiveSetResult project_dual_active_set(const ConstraintSystem& c, const Vector& p, int max_steps = 1000000)
{
  if (p.size() != c.cols()) { throw ConfigError("projection point has wrong dimension"); }
  return detail::GoldfarbIdnani(c, p).solve(max_steps);
}

}  // namespace dpfi::qp
