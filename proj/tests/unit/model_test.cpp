#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpfi/model.hpp"
#include "support/markets.hpp"

using namespace dpfi;

TEST(TimeGrid, TrapezoidWeightsAndExactLinearIntegral)
{
  const auto g = TimeGrid::uniform(1.0, 10.0, 10);
  EXPECT_DOUBLE_EQ(g.dt(), 1.0);
  EXPECT_DOUBLE_EQ(g.weights.front(), 0.5);
  EXPECT_DOUBLE_EQ(g.weights[3], 1.0);
  double wsum = 0.0;
  for (double w : g.weights) { wsum += w; }
  EXPECT_NEAR(wsum, 9.0, 1e-14);
  // int_1^10 t dt = 49.5, exact for the trapezoid rule
  EXPECT_NEAR(g.integrate(g.nodes), 49.5, 1e-12);
  const auto cum = g.cumulative(g.nodes);
  EXPECT_NEAR(cum.back(), 49.5, 1e-12);
  EXPECT_NEAR(cum[2], 0.5 * (9.0 - 1.0), 1e-12);
}

TEST(TimeGrid, RejectsBadInput)
{
  EXPECT_THROW(TimeGrid::uniform(1.0, 1.0, 5), ConfigError);
  EXPECT_THROW(TimeGrid::uniform(0.0, 1.0, 1), ConfigError);
  const auto g = TimeGrid::uniform(0.0, 1.0, 4);
  const std::vector<double> wrong(3, 1.0);
  EXPECT_THROW(g.integrate(wrong), ConfigError);
}

TEST(Demand, HandComputedValues)
{
  auto m = fixtures::duopoly(4);
  // seller a at t = 0: alpha 200, beta 12, gamma 3
  const std::vector<double> p{10.0, 20.0};
  EXPECT_DOUBLE_EQ(base_demand(m, 0, p, 0.0), 200.0 - 120.0 + 60.0);
  EXPECT_DOUBLE_EQ(eval_observed_demand(m, 0, p, 1.5, 0.0), 1.5 * 140.0);
  EXPECT_DOUBLE_EQ(grad_xi_magnitude(m, 0, p, 0.0), 140.0);
  // xi0(0) = 2, tau = 0.5
  EXPECT_DOUBLE_EQ(robust_demand_bound(m, 0, p, 0.0), 1.5 * 140.0);
  EXPECT_DOUBLE_EQ(demand_bound(m, 0, p, 0.0, Mode::nominal), 2.0 * 140.0);
  // above the choke price the robust bound is (xi0 + tau) times the negative factor
  const std::vector<double> high{30.0, 0.0};
  EXPECT_DOUBLE_EQ(robust_demand_bound(m, 0, high, 0.0), 2.5 * (200.0 - 360.0));
}

TEST(Demand, RejectsNonFiniteAndBadIndex)
{
  auto m = fixtures::duopoly(4);
  const std::vector<double> p{1.0, 1.0};
  EXPECT_THROW(base_demand(m, 2, p, 0.0), ConfigError);
  EXPECT_THROW(eval_observed_demand(m, 0, p, std::nan(""), 0.0), ConfigError);
  const std::vector<double> short_p{1.0};
  EXPECT_THROW(base_demand(m, 0, short_p, 0.0), ConfigError);
}

TEST(Demand, RobustBoundNeverExceedsAnyRealization)
{
  auto m = fixtures::duopoly(8, 0.7);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t s = k % 2;
    const std::size_t i = static_cast<std::size_t>(u01(gen) * 8) % 8;
    const double t = m.grid.nodes[i];
    const std::vector<double> p{60.0 * u01(gen), 60.0 * u01(gen)};
    const double xi = m.uncertainty[s].xi0(t) + m.uncertainty[s].tau * (2.0 * u01(gen) - 1.0);
    const double scale = 1.0 + std::abs(base_demand(m, s, p, t));
    EXPECT_LE(robust_demand_bound(m, s, p, t), eval_observed_demand(m, s, p, xi, t) + 1e-12 * scale);
  }
}

TEST(Demand, RobustSlackMonotoneInOwnPrice)
{
  auto m = fixtures::duopoly(8, 0.7);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t s = k % 2;
    const double t = m.grid.nodes[static_cast<std::size_t>(k) % 8];
    std::vector<double> p1{60.0 * u01(gen), 60.0 * u01(gen)};
    std::vector<double> p2 = p1;
    p2[s] = p1[s] + (60.0 - p1[s]) * u01(gen);
    if (base_demand(m, s, p2, t) < 0.0) { continue; }
    const double D = 50.0;
    EXPECT_LE(D - robust_demand_bound(m, s, p1, t), D - robust_demand_bound(m, s, p2, t) + 1e-9);
  }
}

TEST(Assumptions, PresetLikeMarketPasses)
{
  const auto rep = check_assumptions(fixtures::duopoly());
  EXPECT_TRUE(rep.all_passed());
  EXPECT_TRUE(rep.at("A3").by_construction);
  EXPECT_TRUE(rep.at("A5").by_construction);
  EXPECT_THROW(rep.at("A99"), ConfigError);
}

TEST(Assumptions, NegativeBetaFailsA4WithWitness)
{
  auto m = fixtures::monopoly(8);
  m.sellers[0].beta = {-1.0, 0.0};
  const auto rep = check_assumptions(m);
  EXPECT_FALSE(rep.at("A4").passed);
  EXPECT_NE(rep.at("A4").witness.find("t=1"), std::string::npos);
}

TEST(Assumptions, OtherFailuresAreReported)
{
  auto m = fixtures::duopoly(8);
  m.sellers[1].gamma[0] = {-1.0, 0.0};
  EXPECT_FALSE(check_assumptions(m).at("gamma").passed);

  m = fixtures::duopoly(8);
  m.uncertainty[0].tau = 5.0;
  EXPECT_FALSE(check_assumptions(m).at("xi_positive").passed);

  m = fixtures::duopoly(8);
  m.sellers[0].pi_max = m.sellers[0].pi_min;
  EXPECT_FALSE(check_assumptions(m).at("A1").passed);
}

TEST(MarketSpec, ValidateNamesTheProblem)
{
  auto m = fixtures::duopoly(8);
  EXPECT_NO_THROW(m.validate());
  m.sellers[1].inventory = -1.0;
  try {
    m.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("seller b"), std::string::npos);
  }
  m = fixtures::duopoly(8);
  m.sellers[0].gamma[0] = {1.0, 0.0};
  EXPECT_THROW(m.validate(), ConfigError);
  m = fixtures::duopoly(8);
  m.uncertainty.pop_back();
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_EQ(fixtures::duopoly().index_of("b"), 1u);
  EXPECT_THROW(fixtures::duopoly().index_of("zz"), ConfigError);
}

TEST(Revenue, ConstantPathsAndDiscounting)
{
  auto m = fixtures::monopoly(91);
  auto prof = StrategyProfile::zeros(1, 91);
  prof.prices[0].assign(91, 10.0);
  prof.plans[0].assign(91, 5.0);
  EXPECT_NEAR(discounted_revenue(m, prof)[0], 450.0, 1e-9);
  m.rho = 0.1;
  // int_1^10 50 e^{-0.1 t} dt; trapezoid error is O(dt^2)
  const double exact = 50.0 / 0.1 * (std::exp(-0.1) - std::exp(-1.0));
  EXPECT_NEAR(discounted_revenue(m, prof)[0], exact, 1e-3 * exact);
}

TEST(Feasibility, DetectsEachViolationKind)
{
  auto m = fixtures::monopoly(10);
  auto prof = StrategyProfile::zeros(1, 10);
  const double plan = 2500.0 / 9.0;
  prof.plans[0].assign(10, plan);
  prof.prices[0].assign(10, 10.0);
  // bound at price 10 is 2.2 * 500 = 1100 > plan
  EXPECT_TRUE(feasibility_check(m, prof, Mode::robust, 1e-9).empty());

  prof.prices[0][4] = 19.0;  // 2.2 * 50 = 110 < plan
  auto v = feasibility_check(m, prof, Mode::robust, 1e-9);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ConstraintKind::demand);
  EXPECT_EQ(v[0].node, 4u);
  EXPECT_NEAR(v[0].amount, plan - 110.0, 1e-9);
  // nominal multiplier 3 gives 150, still short
  EXPECT_EQ(feasibility_check(m, prof, Mode::nominal, 1e-9).size(), 1u);

  prof.prices[0][4] = 50.0;
  v = feasibility_check(m, prof, Mode::robust, 1e-9);
  bool cap = false;
  for (const auto& x : v) { cap = cap || x.kind == ConstraintKind::price_upper; }
  EXPECT_TRUE(cap);

  prof.prices[0].assign(10, 10.0);
  prof.plans[0][0] += 1.0;
  v = feasibility_check(m, prof, Mode::robust, 1e-9);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ConstraintKind::inventory);
  EXPECT_NEAR(v[0].amount, 0.5, 1e-9);
  EXPECT_THROW(feasibility_check(m, prof, Mode::robust, 0.0), ConfigError);
}
