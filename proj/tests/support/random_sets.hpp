#pragma once

#include <algorithm>
#include <random>

#include "dpfi/model.hpp"

namespace dpfi::fixtures {

/// Random single-seller market on three nodes; the inventory is kept well inside capacity.
inline MarketSpec random_single_seller(std::mt19937_64& gen)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MarketSpec m;
  m.grid = TimeGrid::uniform(0.0, 1.0 + 4.0 * u(gen), 3);
  SellerParams p;
  p.id = "1";
  p.alpha = {50.0 + 100.0 * u(gen), 10.0 * (u(gen) - 0.5)};
  p.beta = {2.0 + 8.0 * u(gen), 0.5 * (u(gen) - 0.5)};
  p.pi_min = 2.0 * u(gen);
  p.pi_max = p.pi_min + 5.0 + 10.0 * u(gen);
  p.d_min = 0.1 + u(gen);
  m.uncertainty.push_back({{1.5 + u(gen), 0.2 * (u(gen) - 0.5)}, 0.6 * u(gen)});
  // capacity at the price floor, robust multiplier
  double cap = 1e300;
  for (double t : m.grid.nodes) {
    const double mult = m.uncertainty[0].xi0(t) - m.uncertainty[0].tau;
    cap = std::min(cap, mult * (p.alpha(t) - p.beta(t) * p.pi_min));
  }
  p.inventory = m.grid.length() * (p.d_min + (0.2 + 0.6 * u(gen)) * (cap - p.d_min));
  m.sellers.push_back(p);
  return m;
}

}  // namespace dpfi::fixtures
