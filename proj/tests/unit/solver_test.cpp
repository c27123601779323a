#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "dpfi/solver/equilibrium.hpp"
#include "support/markets.hpp"

using namespace dpfi;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { d = std::max(d, std::abs(a[i] - b[i])); }
  return d;
}

}  // namespace

TEST(Discretize, LayoutAndRoundTrip)
{
  const auto m = fixtures::duopoly(5);
  const auto disc = discretize(m);
  EXPECT_EQ(disc.size(), 20);
  EXPECT_EQ(disc.price_index(1, 2), 12);
  EXPECT_EQ(disc.plan_index(1, 2), 17);
  const auto slot = disc.slot(17);
  EXPECT_EQ(slot.seller, 1u);
  EXPECT_EQ(slot.node, 2u);
  auto prof = StrategyProfile::zeros(2, 5);
  prof.prices[1][3] = 7.0;
  prof.plans[0][4] = 9.0;
  const auto back = disc.to_profile(disc.to_flat(prof));
  EXPECT_EQ(back.prices, prof.prices);
  EXPECT_EQ(back.plans, prof.plans);
  // robust multiplier xi0(t) - tau at t = 1
  EXPECT_DOUBLE_EQ(disc.multiplier(0, 1, Mode::robust), 2.0 + 0.1 - 0.5);
  EXPECT_DOUBLE_EQ(disc.multiplier(0, 1, Mode::nominal), 2.0 + 0.1);
}

TEST(ViMap, RevenueGradientByHand)
{
  auto m = fixtures::duopoly(3);
  m.rho = 0.5;
  const auto disc = discretize(m);
  qp::Vector u = qp::Vector::LinSpaced(disc.size(), 1.0, 12.0);
  const qp::Vector F = vi_map(disc, u);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double e = std::exp(-0.5 * m.grid.nodes[i]);
      EXPECT_NEAR(F[disc.price_index(s, i)], e * u[disc.plan_index(s, i)], 1e-12);
      EXPECT_NEAR(F[disc.plan_index(s, i)], e * u[disc.price_index(s, i)], 1e-12);
    }
  }
  EXPECT_THROW(vi_map(disc, qp::Vector::Zero(3)), ConfigError);
  EXPECT_GT(default_step(disc, Mode::robust), 0.0);
}

TEST(Poly5, MatchesNormalEquations)
{
  const auto g = TimeGrid::uniform(1.0, 10.0, 40);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(g.n);
  for (std::size_t i = 0; i < g.n; ++i) { y[i] = std::sin(g.nodes[i]) * 10.0 + noise(gen); }
  const auto fit = poly5_fit(g, y);
  // normal equations in long double on raw monomials
  long double N[6][7] = {};
  for (std::size_t i = 0; i < g.n; ++i) {
    long double p[6];
    p[0] = 1.0L;
    for (int k = 1; k < 6; ++k) { p[k] = p[k - 1] * g.nodes[i]; }
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) { N[r][c] += p[r] * p[c]; }
      N[r][6] += p[r] * y[i];
    }
  }
  for (int c = 0; c < 6; ++c) {
    int piv = c;
    for (int r = c + 1; r < 6; ++r) {
      if (std::fabs(N[r][c]) > std::fabs(N[piv][c])) { piv = r; }
    }
    for (int k = 0; k < 7; ++k) { std::swap(N[c][k], N[piv][k]); }
    for (int r = 0; r < 6; ++r) {
      if (r == c) { continue; }
      const long double f = N[r][c] / N[c][c];
      for (int k = c; k < 7; ++k) { N[r][k] -= f * N[c][k]; }
    }
  }
  for (int k = 0; k < 6; ++k) {
    const double ck = static_cast<double>(N[k][6] / N[k][k]);
    EXPECT_NEAR(fit.coefficients[static_cast<std::size_t>(k)], ck, 1e-6 * (1.0 + std::abs(ck))) << "k=" << k;
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    double v = 0.0, p = 1.0;
    for (int k = 0; k < 6; ++k) {
      v += fit.coefficients[static_cast<std::size_t>(k)] * p;
      p *= g.nodes[i];
    }
    EXPECT_NEAR(v, fit.fitted[i], 1e-8);
  }
}

TEST(Poly5, ReproducesQuinticExactly)
{
  const auto g = TimeGrid::uniform(-1.0, 2.0, 12);
  std::vector<double> y(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double t = g.nodes[i];
    y[i] = 1.0 - 2.0 * t + 0.5 * t * t * t - 0.25 * std::pow(t, 5);
  }
  const auto fit = poly5_fit(g, y);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-10);
  EXPECT_NEAR(fit.coefficients[1], -2.0, 1e-10);
  EXPECT_NEAR(fit.coefficients[2], 0.0, 1e-10);
  EXPECT_NEAR(fit.coefficients[3], 0.5, 1e-10);
  EXPECT_NEAR(fit.coefficients[5], -0.25, 1e-10);
  EXPECT_THROW(poly5_fit(TimeGrid::uniform(0.0, 1.0, 5), std::vector<double>(5, 0.0)), ConfigError);
}

TEST(Monopoly, MatchesClosedForm)
{
  // binding demand row and flat plan: D = K / T, pi = (alpha - D / (xi0 - tau)) / beta
  const double plan = 2500.0 / 9.0;
  const double price = (1000.0 - plan / 2.2) / 50.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = solve_equilibrium(fixtures::monopoly(64), Mode::robust, {}, SolverConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 10.0);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_NEAR(r.profile.prices[0][i], price, 1e-4 * price);
    EXPECT_NEAR(r.profile.plans[0][i], plan, 1e-4 * plan);
  }
  const auto a = analytic_single_seller(1000.0, 50.0, 2.2, 2500.0, 9.0);
  EXPECT_NEAR(a.price, price, 1e-12);
  EXPECT_NEAR(a.plan, plan, 1e-12);
  EXPECT_THROW(analytic_single_seller(1000.0, 50.0, 2.2, 1e9, 9.0), ConfigError);
  ASSERT_TRUE(r.vi_gap.has_value());
  EXPECT_LE(std::abs(*r.vi_gap), 1e-6 * r.revenues[0]);
  for (bool b : r.binding.demand_binds[0]) { EXPECT_TRUE(b); }
}

TEST(Monopoly, Poly5RepresentationAgrees)
{
  SolverConfig cfg;
  cfg.representation = Representation::poly5;
  const auto r = solve_equilibrium(fixtures::monopoly(32), Mode::robust, {}, cfg);
  const double price = (1000.0 - 2500.0 / 9.0 / 2.2) / 50.0;
  for (double p : r.profile.prices[0]) { EXPECT_NEAR(p, price, 1e-4 * price); }
}

TEST(Duopoly, CertifiedEquilibrium)
{
  const auto m = fixtures::duopoly(16);
  const auto r = solve_equilibrium(m, Mode::robust, {}, SolverConfig{});
  EXPECT_TRUE(feasibility_check(m, r.profile, Mode::robust, 1e-6).empty());
  double total = 0.0;
  for (double v : r.revenues) { total += v; }
  ASSERT_TRUE(r.vi_gap.has_value());
  EXPECT_LE(*r.vi_gap, 1e-5 * total);
  EXPECT_GE(*r.vi_gap, -1e-6 * total);
  const auto disc = discretize(m);
  for (double imp : best_response_improvement(disc, r.profile, Mode::robust)) { EXPECT_LE(imp, 1e-3); }
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_NEAR(m.grid.integrate(r.profile.plans[s]), m.sellers[s].inventory, 1e-6 * m.sellers[s].inventory);
    for (std::size_t i = 0; i < m.grid.n; ++i) {
      // det M = -2 pi D must be negative
      EXPECT_GT(r.profile.prices[s][i] * r.profile.plans[s][i], 0.0);
    }
  }
}

TEST(Duopoly, OneMoreIterationIsAFixedPoint)
{
  const auto m = fixtures::duopoly(16);
  SolverConfig cfg;
  const auto r = solve_equilibrium(m, Mode::robust, {}, cfg);
  const auto disc = discretize(m);
  const auto set = build_feasible_set(disc, Mode::robust);
  const qp::Vector u = disc.to_flat(r.profile);
  const auto next = qp::project(set.system, u + r.step_alpha * detail::weighted_map(disc, u));
  EXPECT_LE((next.x - u).norm(), cfg.eps1);
}

TEST(Duopoly, RelabelingPermutesTheSolution)
{
  const auto m = fixtures::duopoly(12);
  MarketSpec swapped = m;
  std::swap(swapped.sellers[0], swapped.sellers[1]);
  std::swap(swapped.uncertainty[0], swapped.uncertainty[1]);
  for (auto& sp : swapped.sellers) {
    const auto g = sp.gamma.begin()->second;
    sp.gamma.clear();
    sp.gamma[sp.id == "a" ? 0 : 1] = g;
  }
  const auto r1 = solve_equilibrium(m, Mode::robust, {}, SolverConfig{});
  const auto r2 = solve_equilibrium(swapped, Mode::robust, {}, SolverConfig{});
  EXPECT_LE(max_abs_diff(r1.profile.prices[0], r2.profile.prices[1]), 1e-5);
  EXPECT_LE(max_abs_diff(r1.profile.prices[1], r2.profile.prices[0]), 1e-5);
  EXPECT_LE(max_abs_diff(r1.profile.plans[0], r2.profile.plans[1]), 1e-4);
}

TEST(Duopoly, NominalModeWithZeroTauEqualsRobust)
{
  const auto m = fixtures::duopoly(12, 0.0);
  const auto r1 = solve_equilibrium(m, Mode::robust, {}, SolverConfig{});
  const auto r2 = solve_equilibrium(m, Mode::nominal, {}, SolverConfig{});
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_LE(max_abs_diff(r1.profile.prices[s], r2.profile.prices[s]), 1e-12);
    EXPECT_LE(max_abs_diff(r1.profile.plans[s], r2.profile.plans[s]), 1e-12);
  }
}

TEST(Duopoly, BestResponseBeatsAUniformDeviation)
{
  const auto m = fixtures::duopoly(12);
  const auto disc = discretize(m);
  const auto r = solve_equilibrium(m, Mode::robust, {}, SolverConfig{});
  // A perturbed profile is not an equilibrium: seller a gains by responding.
  auto prof = r.profile;
  for (auto& p : prof.prices[0]) { p *= 0.8; }
  const auto br = best_response(disc, 0, prof, Mode::robust);
  EXPECT_GT(br.objective, discounted_revenue(m, prof)[0]);
  EXPECT_THROW(best_response(disc, 5, prof, Mode::robust), ConfigError);
}

TEST(Errors, InfeasibleInventory)
{
  auto m = fixtures::duopoly(8);
  m.sellers[0].inventory = 1e7;
  try {
    solve_equilibrium(m, Mode::robust, {}, SolverConfig{});
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.seller(), 0);
  }
}

TEST(Errors, BudgetExhaustedCarriesTrace)
{
  SolverConfig cfg;
  cfg.max_iters = 3;
  cfg.eps1 = 1e-14;
  try {
    solve_equilibrium(fixtures::duopoly(8), Mode::robust, {}, cfg);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.trace().size(), 3u);
  }
}

TEST(Errors, BadSolverConfigAndMargin)
{
  SolverConfig cfg;
  cfg.eps1 = 0.0;
  EXPECT_THROW(solve_equilibrium(fixtures::duopoly(8), Mode::robust, {}, cfg), ConfigError);
  auto m = fixtures::duopoly(8, 3.0);
  EXPECT_THROW(solve_equilibrium(m, Mode::robust, {}, SolverConfig{}), ConfigError);
}
