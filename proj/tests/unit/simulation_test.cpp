#include <gtest/gtest.h>

#include <numeric>

#include "dpfi/simulation/experiments.hpp"
#include "support/markets.hpp"

using namespace dpfi;

namespace {

const StrategyProfile& robust_profile()
{
  static const auto r = solve_equilibrium(fixtures::duopoly(16, 0.5), Mode::robust, {}, SolverConfig{});
  return r.profile;
}

}  // namespace

TEST(Random, KeyedStreamIsReproducibleAndKeyed)
{
  KeyedStream a(1, 2, 3, 4), b(1, 2, 3, 4), c(1, 2, 3, 5);
  for (int k = 0; k < 10; ++k) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  // draws do not depend on evaluation order
  const DistributionSpec d{"beta", 1.0, 3.0};
  const double late = beta_variate(d, 9, 1, 500, 7);
  for (std::size_t k = 0; k < 100; ++k) { (void)beta_variate(d, 9, 0, k, 0); }
  EXPECT_EQ(late, beta_variate(d, 9, 1, 500, 7));
}

TEST(Random, BetaMomentsMatchClosedForm)
{
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {1.0, 3.0}, {2.0, 5.0}}) {
    const DistributionSpec d{"beta", a, b};
    const std::size_t N = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double x = beta_variate(d, 42, 0, k, 0);
      ASSERT_GE(x, 0.0);
      ASSERT_LE(x, 1.0);
      s1 += x;
      s2 += x * x;
    }
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
    const double m = s1 / N;
    const double v = s2 / N - m * m;
    EXPECT_NEAR(m, mean, 5.0 * std::sqrt(var / N)) << a << "," << b;
    EXPECT_NEAR(v, var, 0.02 * var) << a << "," << b;
  }
}

TEST(Random, ParseDistribution)
{
  const auto d = parse_distribution("beta:1,3");
  EXPECT_EQ(d.family, "beta");
  EXPECT_DOUBLE_EQ(d.b, 3.0);
  EXPECT_EQ(d.label(), "beta(1,3)");
  EXPECT_THROW(parse_distribution("gauss:0,1"), ConfigError);
  EXPECT_THROW(parse_distribution("beta:x,1"), ConfigError);
  EXPECT_THROW(parse_distribution("beta:0,1"), ConfigError);
  EXPECT_THROW(parse_distribution("beta1,1"), ConfigError);
  EXPECT_THROW(parse_distribution("beta:1,2z"), ConfigError);
}

TEST(Random, XiStaysInBand)
{
  const auto m = fixtures::duopoly(16, 0.5);
  const DistributionSpec d{"beta", 1.0, 3.0};
  for (std::size_t draw = 0; draw < 200; ++draw) {
    const auto xi = sample_xi(m.uncertainty[1], d, m.grid, 1, draw, 3);
    for (std::size_t i = 0; i < m.grid.n; ++i) {
      const double c = m.uncertainty[1].xi0(m.grid.nodes[i]);
      EXPECT_LE(std::abs(xi[i] - c), 0.5 + 1e-12);
    }
  }
  UncertaintyModel none{{2.0, 0.0}, 0.0};
  for (double x : sample_xi(none, d, m.grid, 0, 0, 1)) { EXPECT_EQ(x, 2.0); }
}

TEST(Statistics, PairwiseSumAndSummary)
{
  std::vector<double> v(1000003, 0.1);
  long double exact = 0.0L;
  for (double x : v) { exact += x; }
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(exact), 1e-9);

  const std::vector<double> w{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  const auto st = summarize(w);
  EXPECT_DOUBLE_EQ(st.mean, 5.0);
  // sample variance 32 / 7
  EXPECT_NEAR(st.sd, std::sqrt(32.0 / 7.0), 1e-14);
  EXPECT_EQ(st.min, 2.0);
  EXPECT_EQ(st.max, 9.0);
  EXPECT_EQ(summarize(std::vector<double>{3.0}).sd, 0.0);
  EXPECT_THROW(summarize(std::vector<double>{}), ConfigError);
  // constant sample: sd exactly zero, mean inside [min, max]
  const auto c = summarize(std::vector<double>(777, 0.3));
  EXPECT_EQ(c.sd, 0.0);
  EXPECT_EQ(c.mean, 0.3);
}

TEST(Statistics, QuantileAndHistogram)
{
  const std::vector<double> s{1.0, 2.0, 3.0, 4.0, 5.0};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.1), 1.4);

  std::vector<double> v(5000);
  for (std::size_t k = 0; k < v.size(); ++k) { v[k] = beta_variate({"beta", 2.0, 2.0}, 1, 0, k, 0); }
  const auto h = histogram(v);
  EXPECT_GE(h.counts.size(), 10u);
  EXPECT_EQ(h.edges.size(), h.counts.size() + 1);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), v.size());
  const auto flat = histogram(std::vector<double>(50, 7.0));
  EXPECT_EQ(flat.counts.size(), 10u);
  EXPECT_EQ(std::accumulate(flat.counts.begin(), flat.counts.end(), std::size_t{0}), 50u);
}

TEST(Simulation, RealizedSalesAndProfitByHand)
{
  auto m = fixtures::monopoly(3);
  auto prof = StrategyProfile::zeros(1, 3);
  prof.prices[0] = {10.0, 10.0, 25.0};
  prof.plans[0] = {600.0, 2000.0, 100.0};
  // base factor 500, 500, -250
  const auto sales = realized_sales(prof, m, {{2.0, 2.0, 2.0}});
  EXPECT_EQ(sales[0], (std::vector<double>{600.0, 1000.0, 0.0}));
  const auto profit = realized_profit(prof.prices, sales, 0.0, m.grid);
  // weights 2.25, 4.5, 2.25
  EXPECT_NEAR(profit[0], 2.25 * 6000.0 + 4.5 * 10000.0, 1e-9);
  EXPECT_THROW(realized_sales(prof, m, {}), ConfigError);
}

TEST(Simulation, ResultsDoNotDependOnThreadCount)
{
  const auto m = fixtures::duopoly(16, 0.5);
  auto posted = robust_profile();
  posted.plans[0] = solve_equilibrium(m, Mode::nominal, {}, SolverConfig{}).profile.plans[0];
  const DistributionSpec d{"beta", 1.0, 3.0};
  const auto a = run_scenario(m, posted, d, 3001, 17, 1);
  const auto b = run_scenario(m, posted, d, 3001, 17, 7);
  EXPECT_EQ(a.profits, b.profits);
  EXPECT_EQ(a.sellers[0].stats.mean, b.sellers[0].stats.mean);
  EXPECT_EQ(a.sellers[0].stats.sd, b.sellers[0].stats.sd);
  EXPECT_GT(a.sellers[0].stats.sd, 0.0);
  const auto c = run_scenario(m, posted, d, 3001, 18, 7);
  EXPECT_NE(a.profits, c.profits);
}

TEST(Simulation, RobustCellHasZeroSpreadAndRespectsInventory)
{
  const auto m = fixtures::duopoly(16, 0.5);
  for (const DistributionSpec& d : {DistributionSpec{"beta", 1.0, 1.0}, DistributionSpec{"beta", 1.0, 3.0}}) {
    const auto rep = run_scenario(m, robust_profile(), d, 2000, 5);
    for (std::size_t s = 0; s < 2; ++s) {
      EXPECT_LE(rep.sellers[s].stats.sd, 1e-9 * rep.sellers[s].stats.mean);
      EXPECT_LE(rep.sellers[s].max_total_sales, m.sellers[s].inventory * (1.0 + 1e-6));
    }
  }
}

TEST(Simulation, PolicyCellsAndWorstCaseDominance)
{
  const auto m = fixtures::duopoly(16, 0.5);
  const auto cells = policy_cells(m);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].label(0.5), "NN");
  EXPECT_EQ(cells[1].label(0.5), "NR");
  EXPECT_EQ(cells[2].label(0.5), "RN");
  EXPECT_EQ(cells[3].label(0.5), "RR");
  EXPECT_EQ((ScenarioCell{{0.25, 0.0}}.label(0.5)), "R(0.25)N");

  EquilibriumCache cache(m, {}, SolverConfig{});
  const auto res = scenario_matrix(cache, {DistributionSpec{"beta", 1.0, 1.0}}, 2000, 11);
  const auto& r = res.reports[0];
  // seller 1 (index 0): R vs N holding seller 2's policy fixed
  EXPECT_GE(r[2].sellers[0].stats.min, r[0].sellers[0].stats.min);
  EXPECT_GE(r[3].sellers[0].stats.min, r[1].sellers[0].stats.min);
  EXPECT_GE(r[1].sellers[1].stats.min, r[0].sellers[1].stats.min);
  EXPECT_GE(r[3].sellers[1].stats.min, r[2].sellers[1].stats.min);
  EXPECT_THROW(build_scenario(cache, ScenarioCell{{0.9, 0.0}}), ConfigError);
}

TEST(Sweep, SinglePointEqualsSolveAndInterceptIsReplaced)
{
  const auto m = fixtures::duopoly(12);
  SweepTarget t;
  t.seller = 0;
  t.coefficient = Coefficient::beta;
  const auto changed = apply_sweep_value(m, t, 11.0);
  EXPECT_EQ(changed.sellers[0].beta.a, 11.0);
  EXPECT_EQ(changed.sellers[0].beta.b, -1.0);
  const auto pts = sensitivity_sweep(m, t, {11.0}, {}, SolverConfig{});
  ASSERT_EQ(pts.size(), 1u);
  ASSERT_TRUE(pts[0].ok);
  const auto direct = solve_equilibrium(changed, Mode::robust, {}, SolverConfig{});
  EXPECT_EQ(pts[0].revenues, direct.revenues);

  SweepTarget bad;
  bad.coefficient = Coefficient::gamma;
  bad.competitor = 0;
  EXPECT_THROW(apply_sweep_value(m, bad, 1.0), ConfigError);
  // a failing point is recorded, not thrown
  const auto failing = sensitivity_sweep(m, t, {-5.0}, {}, SolverConfig{});
  EXPECT_FALSE(failing[0].ok);
  EXPECT_FALSE(failing[0].error.empty());
}

TEST(Robustness, CaseIIIAtZeroEqualsNominalCell)
{
  const auto m = fixtures::duopoly(16, 0.5);
  EquilibriumCache cache(m, {}, SolverConfig{});
  const DistributionSpec d{"beta", 1.0, 3.0};
  const auto reps = robustness_sweep(cache, RobustCase::III, {0.0, 0.5}, d, 1500, 4);
  const auto nn = run_scenario(m, build_scenario(cache, ScenarioCell{{0.0, 0.0}}), d, 1500, 4);
  EXPECT_EQ(reps[0].profits, nn.profits);
  EXPECT_LE(reps[1].sellers[1].stats.sd, 1e-9 * reps[1].sellers[1].stats.mean);
  EquilibriumCache single(fixtures::monopoly(8), {}, SolverConfig{});
  EXPECT_THROW(robustness_sweep(single, RobustCase::I, {0.0}, d, 10, 1), ConfigError);
}
