#include <gtest/gtest.h>


#include "dpfi/io/config.hpp"
#include "dpfi/io/manifest.hpp"
#include "dpfi/io/runner.hpp"
#include "support/markets.hpp"

using namespace dpfi;
using json = nlohmann::json;

namespace {

json monopoly_doc()
{
  io::RunConfig c;
  c.name = "mono";
  c.market = fixtures::monopoly(12);
  c.n_draws = 200;
  return io::run_config_json(c);
}

/// Every opened element is closed in order; self-closing tags are skipped.
bool balanced_xml(const std::string& s)
{
  std::vector<std::string> stack;
  for (std::size_t pos = s.find('<'); pos != std::string::npos; pos = s.find('<', pos + 1)) {
    const std::size_t end = s.find('>', pos);
    if (end == std::string::npos) { return false; }
    const std::string body = s.substr(pos + 1, end - pos - 1);
    if (body.empty() || body[0] == '?' || body[0] == '!' || body.back() == '/') { continue; }
    const bool closing = body[0] == '/';
    const std::string name = body.substr(closing ? 1 : 0, body.find_first_of(" \t\n/", closing ? 1 : 0) - (closing ? 1 : 0));
    if (!closing) {
      stack.push_back(name);
    } else if (stack.empty() || stack.back() != name) {
      return false;
    } else {
      stack.pop_back();
    }
  }
  return stack.empty();
}

}  // namespace

TEST(Config, RoundTripsThroughJson)
{
  const auto doc = monopoly_doc();
  const auto c = io::parse_run_config(doc);
  EXPECT_EQ(io::run_config_json(c), doc);
  EXPECT_EQ(c.market.grid.n, 12u);
  EXPECT_EQ(c.market.sellers[0].alpha.a, 1000.0);
}

TEST(Config, RejectsUnknownKeysAndBadTypes)
{
  auto doc = monopoly_doc();
  doc["market"]["sellers"][0]["colour"] = "red";
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["market"]["sellers"][0]["inventory"] = "lots";
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["market"]["sellers"][0].erase("pi_max");
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["solver"]["gap_check"] = 1;
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["seed"] = -3;
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["experiment"] = {{"kind", "sweep"}};
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["rules"] = json::array({{{"kind", "monotone"}, {"delta", 0.3}}});
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  doc = monopoly_doc();
  doc["market"]["sellers"][0]["inventory"] = -1.0;
  EXPECT_THROW(io::parse_run_config(doc), ConfigError);

  EXPECT_THROW(io::load_json_file("/nonexistent/run.json"), ConfigError);
}

TEST(Config, OverridesFollowDottedPaths)
{
  auto doc = monopoly_doc();
  io::apply_override(doc, "market.sellers.0.inventory=1800");
  io::apply_override(doc, "name=other run");
  io::apply_override(doc, "solver.gap_check=false");
  EXPECT_EQ(doc["market"]["sellers"][0]["inventory"], 1800);
  EXPECT_EQ(doc["name"], "other run");
  EXPECT_EQ(doc["solver"]["gap_check"], false);
  EXPECT_EQ(io::parse_run_config(doc).market.sellers[0].inventory, 1800.0);
  EXPECT_THROW(io::apply_override(doc, "market.sellers.5.inventory=1"), ConfigError);
  EXPECT_THROW(io::apply_override(doc, "market.sellers.x.inventory=1"), ConfigError);
  EXPECT_THROW(io::apply_override(doc, "name.first=1"), ConfigError);
  EXPECT_THROW(io::apply_override(doc, "noequals"), ConfigError);
}

TEST(Config, PresetsMatchDocumentedSetup)
{
  for (const auto& name : io::preset_names()) {
    const auto c = io::preset(name);
    EXPECT_EQ(c.name, name);
    EXPECT_EQ(c.market.grid.n, 64u);
    EXPECT_EQ(c.market.grid.t0, 1.0);
    EXPECT_EQ(c.market.grid.tf, 10.0);
    // the preset survives a JSON round trip
    EXPECT_EQ(io::run_config_json(io::parse_run_config(io::run_config_json(c))), io::run_config_json(c));
  }
  const auto c = io::preset("ex-8.1.1");
  ASSERT_EQ(c.market.size(), 2u);
  EXPECT_EQ(c.market.sellers[0].inventory, 2500.0);
  EXPECT_EQ(c.market.sellers[1].inventory, 3000.0);
  EXPECT_EQ(c.market.uncertainty[0].tau, 0.8);
  EXPECT_DOUBLE_EQ(c.market.uncertainty[0].xi0(5.0), 3.5);
  const double ratio = c.market.sellers[0].alpha(10.0) / c.market.sellers[0].beta(10.0);
  EXPECT_EQ(c.market.sellers[0].pi_max, std::ceil(1.2 * ratio));
  EXPECT_THROW(io::preset("ex-9"), ConfigError);
}

TEST(Output, CsvHeadersAndRemainingInventory)
{
  const auto m = fixtures::monopoly(4);
  auto prof = StrategyProfile::zeros(1, 4);
  prof.prices[0].assign(4, 12.0);
  prof.plans[0].assign(4, 2500.0 / 9.0);
  const auto csv = io::solution_csv(m, prof);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "seller,t,price,plan,remaining_inventory");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const auto rem = io::remaining_inventory(m.grid, prof.plans[0], 2500.0);
  EXPECT_EQ(rem.front(), 2500.0);
  EXPECT_NEAR(rem.back(), 0.0, 1e-9);
  EXPECT_NEAR(rem[1], 2500.0 - 3.0 * 2500.0 / 9.0, 1e-9);
  EXPECT_EQ(io::revenue_csv(m, {1.5}), "seller,revenue\n1,1.5\n");
}

TEST(Output, SvgIsWellFormed)
{
  const auto svg = io::line_chart("a < b & c", "t", "y", {{"s<1>", {0.0, 1.0, 2.0}, {1.0, std::nan(""), 3.0}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_TRUE(balanced_xml(svg));
  EXPECT_EQ(svg.find("a < b"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  const auto h = io::histogram_chart("h", "x", {0.0, 1.0, 2.0}, {3, 5});
  EXPECT_TRUE(balanced_xml(h));
  EXPECT_EQ(std::count(h.begin(), h.end(), '\n') > 0, true);
  EXPECT_TRUE(balanced_xml(io::line_chart("empty", "x", "y", {})));
  // values equal up to rounding once hung the tick loop
  const auto ticks = io::detail::nice_ticks(13.636363636363637, 13.636363636363638);
  EXPECT_GE(ticks.size(), 2u);
  EXPECT_LE(ticks.size(), 25u);
}

TEST(Manifest, Sha256KnownVectorsAndBundle)
{
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  io::Bundle b;
  b.add("x.txt", "abc");
  const auto man = b.manifest({{"k", 1}});
  ASSERT_EQ(man["files"].size(), 1u);
  EXPECT_EQ(man["files"][0]["bytes"], 3);
  EXPECT_EQ(man["files"][0]["sha256"], io::sha256_hex("abc"));
  EXPECT_EQ(man["config"]["k"], 1);
}

TEST(Runner, ExitCodes)
{
  EXPECT_EQ(io::exit_code(ConfigError("x")), 2);
  EXPECT_EQ(io::exit_code(InfeasibleError("x", 0, 0)), 4);
  EXPECT_EQ(io::exit_code(ConvergenceError("x", {})), 3);
  EXPECT_EQ(io::exit_code(std::runtime_error("x")), 1);
  try {
    const auto j = json::parse("{");
    FAIL() << j.dump();
  } catch (const json::exception& e) {
    EXPECT_EQ(io::exit_code(e), 2);
  }
}

TEST(Runner, SolveBundleIsDeterministic)
{
  const auto cfg = io::parse_run_config(monopoly_doc());
  const auto a = io::run_experiment(cfg, 1);
  const auto b = io::run_experiment(cfg, 3);
  EXPECT_EQ(a.status, io::exit_ok);
  EXPECT_EQ(a.bundle.files(), b.bundle.files());
  EXPECT_TRUE(a.bundle.files().count("solution.csv"));
  EXPECT_TRUE(a.bundle.files().count("assumptions.json"));
  for (const auto& [name, content] : a.bundle.files()) {
    if (name.ends_with(".svg")) { EXPECT_TRUE(balanced_xml(content)) << name; }
    if (name.ends_with(".json")) { EXPECT_TRUE(json::accept(content)) << name; }
  }
}

TEST(Runner, MatrixBundleIsDeterministicAcrossThreads)
{
  auto doc = monopoly_doc();
  doc["market"] = io::market_json(fixtures::duopoly(12, 0.5));
  doc["experiment"] = {{"kind", "matrix"}};
  doc["n_draws"] = 300;
  const auto cfg = io::parse_run_config(doc);
  const auto a = io::run_experiment(cfg, 1);
  const auto b = io::run_experiment(cfg, 4);
  EXPECT_EQ(a.bundle.files(), b.bundle.files());
  EXPECT_TRUE(a.bundle.files().count("matrix_beta_1_1.csv"));
}

TEST(Runner, CheckReportsInfeasibleSet)
{
  auto cfg = io::parse_run_config(monopoly_doc());
  EXPECT_TRUE(io::check_market(cfg)["feasible"].get<bool>());
  cfg.market.sellers[0].inventory = 1e7;
  EXPECT_THROW(io::check_market(cfg), InfeasibleError);
  EXPECT_THROW(io::run_experiment(cfg, 1), InfeasibleError);
}
