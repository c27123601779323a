#pragma once

/**
 * @file
 * @brief Coefficient tables on the time grid and the flat decision vector.
 *
 * Layout of the flat vector: seller-major, each seller contributes its n
 * prices followed by its n planned demands.
 */

#include <cmath>
#include <cstddef>
#include <vector>

#include "dpfi/model.hpp"
#include "dpfi/qp/constraint_system.hpp"

namespace dpfi {

struct Discretization
{
  MarketSpec market;
  std::size_t S = 0;
  std::size_t n = 0;
  std::vector<std::vector<double>> alpha;               // [s][i]
  std::vector<std::vector<double>> beta;                // [s][i]
  std::vector<std::vector<std::vector<double>>> gamma;  // [s][r][i]
  std::vector<std::vector<double>> xi0;                 // [s][i]
  std::vector<double> tau;                              // [s]
  std::vector<double> discount;                         // exp(-rho t_i)

  struct Slot
  {
    std::size_t seller;
    bool plan;
    std::size_t node;
  };

  Eigen::Index size() const { return static_cast<Eigen::Index>(2 * S * n); }
  Eigen::Index price_index(std::size_t s, std::size_t i) const { return static_cast<Eigen::Index>(s * 2 * n + i); }
  Eigen::Index plan_index(std::size_t s, std::size_t i) const { return static_cast<Eigen::Index>(s * 2 * n + n + i); }

  Slot slot(Eigen::Index k) const
  {
    const auto u = static_cast<std::size_t>(k);
    const std::size_t s = u / (2 * n);
    const std::size_t r = u % (2 * n);
    return {s, r >= n, r % n};
  }

  /// Demand multiplier: xi0 - tau (robust) or xi0 (nominal).
  double multiplier(std::size_t s, std::size_t i, Mode mode) const
  {
    return mode == Mode::robust ? xi0[s][i] - tau[s] : xi0[s][i];
  }

  const TimeGrid& grid() const { return market.grid; }

  qp::Vector to_flat(const StrategyProfile& p) const
  {
    detail::check_shape(market, p);
    qp::Vector u(size());
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        u[price_index(s, i)] = p.prices[s][i];
        u[plan_index(s, i)] = p.plans[s][i];
      }
    }
    return u;
  }

  StrategyProfile to_profile(const qp::Vector& u) const
  {
    if (u.size() != size()) { throw ConfigError("decision vector has wrong length"); }
    auto p = StrategyProfile::zeros(S, n);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        p.prices[s][i] = u[price_index(s, i)];
        p.plans[s][i] = u[plan_index(s, i)];
      }
    }
    return p;
  }

  /// Quadrature weight of every flat position.
  qp::Vector weights_flat() const
  {
    qp::Vector w(size());
    for (Eigen::Index k = 0; k < size(); ++k) { w[k] = market.grid.weights[slot(k).node]; }
    return w;
  }
};

inline Discretization discretize(const MarketSpec& market)
{
  market.validate();
  Discretization d;
  d.market = market;
  d.S = market.size();
  d.n = market.grid.n;
  d.alpha.assign(d.S, std::vector<double>(d.n));
  d.beta.assign(d.S, std::vector<double>(d.n));
  d.xi0.assign(d.S, std::vector<double>(d.n));
  d.gamma.assign(d.S, std::vector<std::vector<double>>(d.S, std::vector<double>(d.n, 0.0)));
  d.tau.resize(d.S);
  d.discount.resize(d.n);
  for (std::size_t i = 0; i < d.n; ++i) { d.discount[i] = std::exp(-market.rho * market.grid.nodes[i]); }
  for (std::size_t s = 0; s < d.S; ++s) {
    const auto& p = market.sellers[s];
    d.tau[s] = market.uncertainty[s].tau;
    for (std::size_t i = 0; i < d.n; ++i) {
      const double t = market.grid.nodes[i];
      d.alpha[s][i] = p.alpha(t);
      d.beta[s][i] = p.beta(t);
      d.xi0[s][i] = market.uncertainty[s].xi0(t);
      for (const auto& [r, g] : p.gamma) { d.gamma[s][r][i] = g(t); }
    }
  }
  return d;
}

}  // namespace dpfi
