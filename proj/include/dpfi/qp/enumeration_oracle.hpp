#pragma once

/**
 * @file
 * @brief Brute-force projection for tiny polyhedra.
 *
 * Enumerates every active-set assignment (each bound or row inactive, at its
 * lower side, or at its upper side), projects onto the corresponding affine
 * subspace, and keeps the closest feasible candidate.  Exponential in the
 * number of constraints; meant as a reference for testing.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/qp/constraint_system.hpp"

namespace dpfi::qp {

inline Vector enumerate_projection(const ConstraintSystem& c, const Vector& p, double feas_tol = 1e-10)
{
  const Eigen::Index n = c.cols();
  const Eigen::MatrixXd A = Eigen::MatrixXd(c.A);

  // Collect one-sided faces: (row vector, value, choices).
  struct Face
  {
    Eigen::RowVectorXd a;
    double lo, hi;
  };
  std::vector<Face> faces;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(c.lb[j]) || std::isfinite(c.ub[j])) {
      faces.push_back({Eigen::RowVectorXd::Unit(n, j), c.lb[j], c.ub[j]});
    }
  }
  for (Eigen::Index i = 0; i < A.rows(); ++i) { faces.push_back({A.row(i), c.lo[i], c.hi[i]}); }
  const std::size_t F = faces.size();
  if (F > 20) { throw ConfigError("enumeration oracle limited to 20 constraints"); }

  // Allowed states per face: 0 inactive, 1 lower, 2 upper.
  std::vector<std::vector<int>> allowed(F);
  for (std::size_t f = 0; f < F; ++f) {
    const auto& fc = faces[f];
    if (fc.lo == fc.hi) {
      allowed[f] = {1};
      continue;
    }
    allowed[f] = {0};
    if (std::isfinite(fc.lo)) { allowed[f].push_back(1); }
    if (std::isfinite(fc.hi)) { allowed[f].push_back(2); }
  }
  std::vector<std::size_t> pos(F, 0);
  std::vector<int> state(F);
  double best = std::numeric_limits<double>::infinity();
  Vector best_x;
  for (;;) {
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    bool skip = false;
    for (std::size_t f = 0; f < F; ++f) { state[f] = allowed[f][pos[f]]; }
    for (std::size_t f = 0; f < F && !skip; ++f) {
      const auto& fc = faces[f];
      const bool eq = fc.lo == fc.hi;
      if (eq && state[f] != 1) { skip = true; }
      if (state[f] == 1) {
        if (!std::isfinite(fc.lo)) { skip = true; }
        rows.push_back(fc.a);
        rhs.push_back(fc.lo);
      } else if (state[f] == 2) {
        if (!std::isfinite(fc.hi) || eq) { skip = true; }
        rows.push_back(fc.a);
        rhs.push_back(fc.hi);
      }
    }
    if (!skip) {
      Vector x = p;
      if (!rows.empty()) {
        Eigen::MatrixXd Aa(static_cast<Eigen::Index>(rows.size()), n);
        Vector b(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
          Aa.row(static_cast<Eigen::Index>(k)) = rows[k];
          b[static_cast<Eigen::Index>(k)] = rhs[k];
        }
        // x = p - Aa^T lambda with Aa Aa^T lambda = Aa p - b (minimum-norm lambda)
        const Eigen::MatrixXd G = Aa * Aa.transpose();
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(G);
        const Vector r = Aa * p - b;
        const Vector lam = cod.solve(r);
        x = p - Aa.transpose() * lam;
        if ((Aa * x - b).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
          x.resize(0);  // inconsistent active set
        }
      }
      if (x.size() == n && c.max_violation(x) <= feas_tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        const double d = (x - p).squaredNorm();
        if (d < best) {
          best = d;
          best_x = x;
        }
      }
    }
    std::size_t k = 0;
    while (k < F && ++pos[k] == allowed[k].size()) { pos[k++] = 0; }
    if (k == F) { break; }
  }
  if (best_x.size() == 0) { throw InfeasibleError("no feasible active set", -1, -1); }
  return best_x;
}

}  // namespace dpfi::qp
