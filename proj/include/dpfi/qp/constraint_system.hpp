#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dpfi::qp {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

/**
 * Polyhedron { x : lb <= x <= ub, lo <= A x <= hi }.
 *
 * Equality rows have lo == hi; one-sided rows use an infinite bound.
 */
struct ConstraintSystem
{
  Vector lb;
  Vector ub;
  RowMatrix A;
  Vector lo;
  Vector hi;

  Eigen::Index cols() const { return lb.size(); }
  Eigen::Index rows() const { return A.rows(); }

  bool is_equality(Eigen::Index i) const { return lo[i] == hi[i]; }

  /// Largest bound or row violation at x (0 when feasible).
  double max_violation(const Vector& x) const
  {
    double v = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      v = std::max({v, lb[j] - x[j], x[j] - ub[j]});
    }
    const Vector ax = A * x;
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      v = std::max({v, lo[i] - ax[i], ax[i] - hi[i]});
    }
    return v;
  }
};

/// Incremental builder for ConstraintSystem rows.
class ConstraintBuilder
{
 public:
  explicit ConstraintBuilder(Eigen::Index n) : n_(n), lb_(Vector::Constant(n, -inf)), ub_(Vector::Constant(n, inf)) {}

  void bound(Eigen::Index j, double lo, double hi)
  {
    lb_[j] = lo;
    ub_[j] = hi;
  }

  /// Adds lo <= sum coef * x[idx] <= hi and returns the row index.
  Eigen::Index row(const std::vector<std::pair<Eigen::Index, double>>& terms, double lo, double hi)
  {
    const auto r = static_cast<Eigen::Index>(lo_.size());
    for (const auto& [j, c] : terms) {
      if (c != 0.0) { trip_.emplace_back(r, j, c); }
    }
    lo_.push_back(lo);
    hi_.push_back(hi);
    return r;
  }

  Eigen::Index rows() const { return static_cast<Eigen::Index>(lo_.size()); }

  ConstraintSystem build() const
  {
    ConstraintSystem c;
    c.lb = lb_;
    c.ub = ub_;
    c.A.resize(rows(), n_);
    c.A.setFromTriplets(trip_.begin(), trip_.end());
    c.A.makeCompressed();
    c.lo = Eigen::Map<const Vector>(lo_.data(), rows());
    c.hi = Eigen::Map<const Vector>(hi_.data(), rows());
    return c;
  }

 private:
  Eigen::Index n_;
  Vector lb_;
  Vector ub_;
  std::vector<Eigen::Triplet<double>> trip_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace dpfi::qp
