#pragma once

// Small hand-built markets shared by the unit tests.

#include "dpfi/model.hpp"

namespace dpfi::fixtures {

/// Constant-coefficient single seller on [1, 10] with rho = 0.
inline MarketSpec monopoly(std::size_t n = 64)
{
  MarketSpec m;
  m.grid = TimeGrid::uniform(1.0, 10.0, n);
  SellerParams p;
  p.id = "1";
  p.alpha = {1000.0, 0.0};
  p.beta = {50.0, 0.0};
  p.inventory = 2500.0;
  p.pi_min = 0.0;
  p.pi_max = 40.0;
  p.d_min = 1e-3;
  m.sellers.push_back(p);
  m.uncertainty.push_back({{3.0, 0.0}, 0.8});
  return m;
}

/// Two symmetric-ish sellers with time-varying coefficients, small enough for quick solves.
inline MarketSpec duopoly(std::size_t n = 16, double tau = 0.5)
{
  MarketSpec m;
  m.grid = TimeGrid::uniform(0.0, 4.0, n);
  const double K[2] = {300.0, 360.0};
  for (std::size_t s = 0; s < 2; ++s) {
    SellerParams p;
    p.id = s == 0 ? "a" : "b";
    p.alpha = {200.0, 0.0};
    p.beta = {12.0 - 2.0 * static_cast<double>(s), -1.0};
    p.gamma[1 - s] = {3.0, -0.2};
    p.inventory = K[s];
    p.pi_min = 0.0;
    p.pi_max = 60.0;
    p.d_min = 1e-4;
    m.sellers.push_back(p);
    m.uncertainty.push_back({{2.0, 0.1}, tau});
  }
  return m;
}

}  // namespace dpfi::fixtures
