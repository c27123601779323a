#pragma once

/**
 * @file
 * @brief Euclidean projection onto a polyhedron.
 *
 * Solves
 * \f[
 *   \min_x \tfrac12 \|x - p\|^2 \quad \text{s.t.} \quad lb \le x \le ub,\; lo \le A x \le hi
 * \f]
 * with an operator-splitting (ADMM) iteration in the style of OSQP, followed by
 * an active-set polishing step that solves the reduced KKT system exactly.
 * A Projector keeps the factorizations and the last primal/dual pair so that
 * a sequence of projections onto the same polyhedron is warm started.  When the
 * active set does not change between calls the projection costs one
 * triangular solve.
 */

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/qp/constraint_system.hpp"
#include "dpfi/qp/dual_active_set.hpp"

namespace dpfi::qp {

struct ProjectionSettings
{
  /// Target for the relative KKT residual (see kkt_residual).
  double tol = 1e-9;
  int max_iterations = 100000;
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  int check_interval = 10;
  /// ADMM iterations before handing over to the dual active-set method (0: never).
  int fallback_after = 2000;
};

struct ProjectionResult
{
  Vector x;
  /// Multipliers of the rows of A in the caller's scaling: positive when the
  /// upper side is active, negative when the lower side is.
  Vector row_duals;
  /// Multipliers of the variable bounds, same sign convention.
  Vector bound_duals;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

class ProjectionError : public ConvergenceError
{
 public:
  ProjectionError(const std::string& what, Vector best, double residual)
      : ConvergenceError(what, {residual}), best_(std::move(best)), residual_(residual)
  {}
  const Vector& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector best_;
  double residual_;
};

namespace detail {

inline Vector row_norms(const RowMatrix& A)
{
  Vector nrm = Vector::Zero(A.rows());
  for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
    for (RowMatrix::InnerIterator it(A, i); it; ++it) { nrm[i] += it.value() * it.value(); }
  }
  return nrm.cwiseSqrt();
}

/**
 * Relative KKT residual.  `vals`, `lo`, `hi`, `y` cover the stacked
 * constraints (rows with unit norm, then variable bounds); `stat` is
 * x - p + A^T y.  Stationarity and primal violation are divided by
 * 1 + max(|x|, |p|), complementarity by that times 1 + |y|.
 */
inline double relative_kkt(const Vector& stat, const Vector& p, const Vector& x, const Vector& vals, const Vector& lo,
                           const Vector& hi, const Vector& y)
{
  const double xs = 1.0 + std::max(x.lpNorm<Eigen::Infinity>(), p.lpNorm<Eigen::Infinity>());
  const double ys = 1.0 + y.lpNorm<Eigen::Infinity>();
  double res = stat.lpNorm<Eigen::Infinity>() / xs;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    res = std::max({res, (lo[i] - vals[i]) / xs, (vals[i] - hi[i]) / xs});
    if (y[i] > 0.0) {
      res = std::max(res, std::isfinite(hi[i]) ? y[i] * std::abs(hi[i] - vals[i]) / (xs * ys) : y[i] / ys);
    } else if (y[i] < 0.0) {
      res = std::max(res, std::isfinite(lo[i]) ? -y[i] * std::abs(vals[i] - lo[i]) / (xs * ys) : -y[i] / ys);
    }
  }
  return res;
}

}  // namespace detail

/**
 * Relative KKT residual of (x, duals) for the projection of p, measured on
 * the system with rows scaled to unit norm (see detail::relative_kkt).
 */
inline double kkt_residual(const ConstraintSystem& c, const Vector& p, const Vector& x, const Vector& row_duals,
                           const Vector& bound_duals)
{
  Vector nrm = detail::row_norms(c.A);
  for (Eigen::Index i = 0; i < nrm.size(); ++i) {
    if (nrm[i] == 0.0) { nrm[i] = 1.0; }
  }
  const Eigen::Index m = c.rows(), n = c.cols();
  Vector vals(m + n), lo(m + n), hi(m + n), y(m + n);
  vals << (c.A * x).cwiseQuotient(nrm), x;
  lo << c.lo.cwiseQuotient(nrm), c.lb;
  hi << c.hi.cwiseQuotient(nrm), c.ub;
  y << row_duals.cwiseProduct(nrm), bound_duals;
  const Vector stat = x - p + c.A.transpose() * row_duals + bound_duals;
  return detail::relative_kkt(stat, p, x, vals, lo, hi, y);
}

class Projector
{
 public:
  explicit Projector(ProjectionSettings settings = {}) : s_(settings) {}

  const ProjectionSettings& settings() const { return s_; }
  ProjectionSettings& settings() { return s_; }

  /// Drops warm-start state and cached factorizations.
  void reset()
  {
    prepared_ = false;
    have_warm_ = false;
    last_active_.clear();
    polish_pattern_.clear();
  }

  ProjectionResult project(const ConstraintSystem& c, const Vector& p)
  {
    if (p.size() != c.cols()) { throw ConfigError("projection point has wrong dimension"); }
    prepare(c);
    const Eigen::Index n = c.cols();
    const Eigen::Index m = mf_;

    Vector best_x = p.cwiseMax(c.lb).cwiseMin(c.ub);
    double best_res = inf;

    // Fast path: the previous active set is often still correct.
    if (!last_active_.empty()) {
      Vector x, y;
      if (polish(p, last_active_, x, y)) {
        const double r = residual_scaled(p, x, y);
        if (r <= s_.tol) { return finish(c, p, x, y, r, 0, true); }
        if (r < best_res) {
          best_res = r;
          best_x = x;
        }
      }
    }

    Vector x, z, y;
    if (have_warm_ && x_.size() == n && y_.size() == m) {
      x = x_;
      y = y_;
    } else {
      x = p.cwiseMax(c.lb).cwiseMin(c.ub);
      y = Vector::Zero(m);
    }
    z = (Af_ * x).cwiseMax(lf_).cwiseMin(uf_);

    double eps = 1e-4;
    int checks = 0;
    Pattern tried;
    const double a = s_.relaxation;
    Vector rhs(n), xt(n), zt(m), zhat(m), znew(m);
    for (int it = 1; it <= s_.max_iterations; ++it) {
      rhs = s_.sigma * x + p + AfT_ * (rho_vec_.cwiseProduct(z) - y);
      xt = ldlt_.solve(rhs);
      zt = Af_ * xt;
      x = a * xt + (1.0 - a) * x;
      zhat = a * zt + (1.0 - a) * z;
      znew = (zhat + y.cwiseQuotient(rho_vec_)).cwiseMax(lf_).cwiseMin(uf_);
      y += rho_vec_.cwiseProduct(zhat - znew);
      z = znew;

      if (it == s_.fallback_after) {
        if (auto r = exact(c, p)) { return *r; }
      }
      if (it % s_.check_interval != 0) { continue; }
      ++checks;
      const Vector ax = Af_ * x;
      const Vector aty = AfT_ * y;
      const double r_prim = (ax - z).lpNorm<Eigen::Infinity>();
      const double r_dual = (x - p + aty).lpNorm<Eigen::Infinity>();
      const double prim_scale = std::max(ax.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>());
      const double dual_scale =
          std::max({x.lpNorm<Eigen::Infinity>(), aty.lpNorm<Eigen::Infinity>(), p.lpNorm<Eigen::Infinity>()});

      // Polish whenever the guessed active set changes; on thin sets ADMM
      // identifies it long before it reaches the tolerance.
      const bool loose = r_prim <= eps * (1.0 + prim_scale) && r_dual <= eps * (1.0 + dual_scale);
      auto pattern = active_pattern(z, y);
      if (!loose && pattern != tried) {
        tried = pattern;
        Vector xp, yp;
        if (polish(p, pattern, xp, yp)) {
          const double r = residual_scaled(p, xp, yp);
          if (r <= s_.tol) {
            x_ = x;
            y_ = y;
            have_warm_ = true;
            last_active_ = pattern;
            return finish(c, p, xp, yp, r, it, true);
          }
          if (r < best_res) {
            best_res = r;
            best_x = xp;
          }
        }
      }
      if (loose) {
        Vector xp, yp;
        if (polish(p, pattern, xp, yp)) {
          const double r = residual_scaled(p, xp, yp);
          if (r <= s_.tol) {
            x_ = x;
            y_ = y;
            have_warm_ = true;
            last_active_ = pattern;
            return finish(c, p, xp, yp, r, it, true);
          }
          if (r < best_res) {
            best_res = r;
            best_x = xp;
          }
        }
        const double r = residual_scaled(p, x, y);
        if (r <= s_.tol) {
          x_ = x;
          y_ = y;
          have_warm_ = true;
          last_active_ = active_pattern(z, y);
          return finish(c, p, x, y, r, it, false);
        }
        if (r < best_res) {
          best_res = r;
          best_x = x;
        }
        eps = std::max(eps * 0.1, 1e-15);
      }

      if (checks % 5 == 0) {
        const double ratio = std::sqrt((r_prim / (prim_scale + 1e-30)) / (r_dual / (dual_scale + 1e-30) + 1e-300));
        const double new_rho = std::clamp(rho_ * ratio, 1e-6, 1e6);
        if (std::isfinite(new_rho) && (new_rho > 5.0 * rho_ || new_rho < rho_ / 5.0)) {
          y_scale_rho(new_rho);
        }
      }
    }
    have_warm_ = false;
    throw ProjectionError("projection did not reach the KKT tolerance within the iteration budget", best_x,
                          best_res);
  }

 private:
  // 0 inactive, -1 lower active, +1 upper active, 2 equality
  using Pattern = std::vector<signed char>;

  void prepare(const ConstraintSystem& c)
  {
    const bool same = prepared_ && c.cols() == n_ && same_matrix(c.A) && same_equalities(c);
    n_ = c.cols();
    if (!same) {
      A_in_ = c.A;
      eq_in_.assign(static_cast<std::size_t>(c.rows()), 0);
      for (Eigen::Index i = 0; i < c.rows(); ++i) { eq_in_[static_cast<std::size_t>(i)] = c.is_equality(i) ? 1 : 0; }
      scale_ = detail::row_norms(c.A);
      for (Eigen::Index i = 0; i < scale_.size(); ++i) {
        if (scale_[i] == 0.0) {
          if (c.lo[i] > 0.0 || c.hi[i] < 0.0) { throw ConfigError("constraint row with no coefficients is infeasible"); }
          scale_[i] = 1.0;
        }
      }
      mrows_ = c.rows();
      mf_ = mrows_ + n_;
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(c.A.nonZeros() + n_));
      for (Eigen::Index i = 0; i < c.A.outerSize(); ++i) {
        for (RowMatrix::InnerIterator it(c.A, i); it; ++it) {
          trip.emplace_back(i, it.col(), it.value() / scale_[i]);
        }
      }
      for (Eigen::Index j = 0; j < n_; ++j) { trip.emplace_back(mrows_ + j, j, 1.0); }
      Af_.resize(mf_, n_);
      Af_.setFromTriplets(trip.begin(), trip.end());
      Af_.makeCompressed();
      AfT_ = Af_.transpose();
      rho_ = s_.rho;
      factor_admm();
      polish_pattern_.clear();
      if (have_warm_ && (x_.size() != n_ || y_.size() != mf_)) { have_warm_ = false; }
      if (static_cast<Eigen::Index>(last_active_.size()) != mf_) { last_active_.clear(); }
      prepared_ = true;
    }
    lf_.resize(mf_);
    uf_.resize(mf_);
    for (Eigen::Index i = 0; i < mrows_; ++i) {
      lf_[i] = c.lo[i] / scale_[i];
      uf_[i] = c.hi[i] / scale_[i];
    }
    lf_.tail(n_) = c.lb;
    uf_.tail(n_) = c.ub;
    if (!((lf_.array() <= uf_.array()).all())) { throw ConfigError("constraint with lower bound above upper bound"); }
  }

  bool same_matrix(const RowMatrix& A) const
  {
    if (A.rows() != A_in_.rows() || A.cols() != A_in_.cols() || A.nonZeros() != A_in_.nonZeros()) { return false; }
    if (!A.isCompressed() || !A_in_.isCompressed()) { return A.isApprox(A_in_, 0.0); }
    const auto nnz = static_cast<std::size_t>(A.nonZeros());
    return std::memcmp(A.valuePtr(), A_in_.valuePtr(), nnz * sizeof(double)) == 0 &&
           std::memcmp(A.innerIndexPtr(), A_in_.innerIndexPtr(), nnz * sizeof(RowMatrix::StorageIndex)) == 0 &&
           std::memcmp(A.outerIndexPtr(), A_in_.outerIndexPtr(),
                       static_cast<std::size_t>(A.rows() + 1) * sizeof(RowMatrix::StorageIndex)) == 0;
  }

  bool same_equalities(const ConstraintSystem& c) const
  {
    if (static_cast<Eigen::Index>(eq_in_.size()) != c.rows()) { return false; }
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if ((c.is_equality(i) ? 1 : 0) != eq_in_[static_cast<std::size_t>(i)]) { return false; }
    }
    return true;
  }

  void factor_admm()
  {
    rho_vec_.resize(mf_);
    for (Eigen::Index i = 0; i < mrows_; ++i) { rho_vec_[i] = eq_in_[static_cast<std::size_t>(i)] ? 1e3 * rho_ : rho_; }
    rho_vec_.tail(n_).setConstant(rho_);
    Eigen::SparseMatrix<double> M = AfT_ * rho_vec_.asDiagonal() * Af_;
    Eigen::SparseMatrix<double> I(n_, n_);
    I.setIdentity();
    M += (1.0 + s_.sigma) * I;
    ldlt_.compute(M);
    if (ldlt_.info() != Eigen::Success) { throw Error("ADMM system factorization failed"); }
  }

  void y_scale_rho(double new_rho)
  {
    rho_ = new_rho;
    factor_admm();
  }

  Pattern active_pattern(const Vector& z, const Vector& y) const
  {
    Pattern pat(static_cast<std::size_t>(mf_), 0);
    for (Eigen::Index i = 0; i < mf_; ++i) {
      auto& v = pat[static_cast<std::size_t>(i)];
      if (lf_[i] == uf_[i]) {
        v = 2;
      } else if (z[i] - lf_[i] < -y[i]) {
        v = -1;
      } else if (uf_[i] - z[i] < y[i]) {
        v = 1;
      }
    }
    return pat;
  }

  /// Solves the equality-constrained projection for a fixed active set.
  bool polish(const Vector& p, const Pattern& pat, Vector& x, Vector& y)
  {
    if (pat != polish_pattern_) {
      polish_rows_.clear();
      for (Eigen::Index i = 0; i < mf_; ++i) {
        if (pat[static_cast<std::size_t>(i)] != 0) { polish_rows_.push_back(i); }
      }
      const auto k = static_cast<Eigen::Index>(polish_rows_.size());
      std::vector<Eigen::Triplet<double>> trip;
      for (Eigen::Index j = 0; j < n_; ++j) { trip.emplace_back(j, j, 1.0); }
      for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index row = polish_rows_[static_cast<std::size_t>(r)];
        for (Eigen::SparseMatrix<double>::InnerIterator it(AfT_, row); it; ++it) {
          trip.emplace_back(n_ + r, it.row(), it.value());
          trip.emplace_back(it.row(), n_ + r, it.value());
        }
      }
      K0_.resize(n_ + k, n_ + k);
      K0_.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseMatrix<double> Kd = K0_;
      for (Eigen::Index r = 0; r < k; ++r) { Kd.coeffRef(n_ + r, n_ + r) = -polish_delta_; }
      polish_ldlt_.compute(Kd);
      if (polish_ldlt_.info() != Eigen::Success) {
        polish_pattern_.clear();
        return false;
      }
      polish_pattern_ = pat;
    }
    const auto k = static_cast<Eigen::Index>(polish_rows_.size());
    Vector rhs(n_ + k);
    rhs.head(n_) = p;
    for (Eigen::Index r = 0; r < k; ++r) {
      const Eigen::Index row = polish_rows_[static_cast<std::size_t>(r)];
      rhs[n_ + r] = pat[static_cast<std::size_t>(row)] == -1 ? lf_[row] : uf_[row];
    }
    Vector sol = polish_ldlt_.solve(rhs);
    for (int refine = 0; refine < 6; ++refine) {
      const Vector r = rhs - K0_ * sol;
      if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) { break; }
      sol += polish_ldlt_.solve(r);
    }
    if (!sol.allFinite()) { return false; }
    x = sol.head(n_);
    y = Vector::Zero(mf_);
    for (Eigen::Index r = 0; r < k; ++r) { y[polish_rows_[static_cast<std::size_t>(r)]] = sol[n_ + r]; }
    return true;
  }

  /// Dual active-set solve; adopts its active set for the next fast path.
  std::optional<ProjectionResult> exact(const ConstraintSystem& c, const Vector& p)
  {
    DualActiveSetResult r;
    try {
      r = project_dual_active_set(c, p);
    } catch (const Error&) {
      return std::nullopt;
    }
    const double res = kkt_residual(c, p, r.x, r.row_duals, r.bound_duals);
    if (!(res <= s_.tol)) { return std::nullopt; }
    Vector y(mf_);
    y << r.row_duals.cwiseProduct(scale_), r.bound_duals;
    Pattern pat(static_cast<std::size_t>(mf_), 0);
    for (Eigen::Index i = 0; i < mf_; ++i) {
      auto& v = pat[static_cast<std::size_t>(i)];
      v = lf_[i] == uf_[i] ? 2 : y[i] > 0.0 ? 1 : y[i] < 0.0 ? -1 : 0;
    }
    x_ = r.x;
    y_ = y;
    have_warm_ = true;
    last_active_ = pat;
    ProjectionResult out;
    out.x = r.x;
    out.row_duals = r.row_duals;
    out.bound_duals = r.bound_duals;
    out.kkt_residual = res;
    out.iterations = s_.fallback_after;
    out.polished = true;
    return out;
  }

  double residual_scaled(const Vector& p, const Vector& x, const Vector& y) const
  {
    return detail::relative_kkt(x - p + AfT_ * y, p, x, Af_ * x, lf_, uf_, y);
  }

  ProjectionResult finish(const ConstraintSystem& c, const Vector&, const Vector& x, const Vector& y, double res,
                          int iters, bool polished)
  {
    ProjectionResult out;
    out.x = x;
    out.row_duals = y.head(mrows_).cwiseQuotient(scale_);
    out.bound_duals = y.tail(n_);
    out.kkt_residual = res;
    out.iterations = iters;
    out.polished = polished;
    (void)c;
    if (polished) {
      // Seed the next warm start with the exact pair.
      x_ = x;
      y_ = y;
      have_warm_ = true;
    }
    return out;
  }

  ProjectionSettings s_;
  bool prepared_ = false;
  Eigen::Index n_ = 0;
  Eigen::Index mrows_ = 0;
  Eigen::Index mf_ = 0;
  RowMatrix A_in_;
  std::vector<char> eq_in_;
  Vector scale_;
  Eigen::SparseMatrix<double> Af_;
  Eigen::SparseMatrix<double> AfT_;
  Vector lf_, uf_;
  Vector rho_vec_;
  double rho_ = 0.1;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;

  bool have_warm_ = false;
  Vector x_, y_;
  Pattern last_active_;

  double polish_delta_ = 1e-11;
  Pattern polish_pattern_;
  std::vector<Eigen::Index> polish_rows_;
  Eigen::SparseMatrix<double> K0_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> polish_ldlt_;
};

/// One-shot projection without warm start.
inline ProjectionResult project(const ConstraintSystem& c, const Vector& p, double tol = 1e-9)
{
  ProjectionSettings s;
  s.tol = tol;
  Projector proj(s);
  return proj.project(c, p);
}

}  // namespace dpfi::qp
