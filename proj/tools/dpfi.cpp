// Command-line driver: solve, simulate and sweep dynamic pricing equilibria.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dpfi/io/runner.hpp"

namespace {

using dpfi::io::json;

struct Options
{
  std::string config;
  std::string preset;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> dists;
  std::optional<std::size_t> draws;
  std::optional<std::size_t> grid;
  std::optional<double> rho;
  std::vector<std::string> sets;
  std::size_t threads = 0;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Options& o, bool needs_config)
{
  auto* c = cmd->add_option("--config,-c", o.config, "run configuration (JSON)");
  if (needs_config) { c->required(); }
  cmd->add_option("--out,-o", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "Monte Carlo seed");
  cmd->add_option("--dist", o.dists, "uncertainty distribution family:a,b (repeatable)");
  cmd->add_option("--draws", o.draws, "Monte Carlo draws");
  cmd->add_option("--grid", o.grid, "number of grid nodes");
  cmd->add_option("--rho", o.rho, "discount rate");
  cmd->add_option("--set", o.sets, "override key.path=value (repeatable)");
  cmd->add_option("--threads", o.threads, "worker threads for simulation (0 = hardware)");
  cmd->add_flag("--print-config", o.print_config, "print the resolved configuration and exit");
}

/// Config document with flag overrides applied, ready for validation.
json resolve(const Options& o, const std::optional<dpfi::io::ExperimentKind>& kind)
{
  json doc = o.preset.empty() ? dpfi::io::load_json_file(o.config)
                              : dpfi::io::run_config_json(dpfi::io::preset(o.preset));
  if (kind) {
    if (!doc.contains("experiment") || !doc["experiment"].is_object()) { doc["experiment"] = json::object(); }
    doc["experiment"]["kind"] = dpfi::io::to_string(*kind);
  }
  if (o.out) { doc["output_dir"] = *o.out; }
  if (o.seed) { doc["seed"] = *o.seed; }
  if (o.draws) { doc["n_draws"] = *o.draws; }
  if (o.grid) { doc["market"]["grid_nodes"] = *o.grid; }
  if (o.rho) { doc["market"]["rho"] = *o.rho; }
  if (!o.dists.empty()) {
    json arr = json::array();
    for (const auto& d : o.dists) { arr.push_back(d); }
    doc["distributions"] = arr;
  }
  for (const auto& s : o.sets) { dpfi::io::apply_override(doc, s); }
  return doc;
}

int run(const Options& o, const std::optional<dpfi::io::ExperimentKind>& kind, bool check_only)
{
  dpfi::io::RunConfig cfg;
  json resolved;
  try {
    cfg = dpfi::io::parse_run_config(resolve(o, kind));
    resolved = dpfi::io::run_config_json(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dpfi::io::exit_config;
  }
  if (o.print_config) {
    std::cout << resolved.dump(2) << '\n';
    return dpfi::io::exit_ok;
  }
  for (const auto& n : cfg.notes) { std::cerr << "note: " << n << '\n'; }

  try {
    dpfi::io::RunOutcome outcome;
    if (check_only) {
      const auto rep = dpfi::io::check_market(cfg);
      outcome.bundle.add_json("check.json", rep);
      for (const auto& c : rep["assumptions"]) {
        std::cout << (c["passed"].get<bool>() ? "ok    " : "FAIL  ") << c["name"].get<std::string>() << "  "
                  << c["description"].get<std::string>() << '\n';
      }
      std::cout << "strategy set (" << rep["mode"].get<std::string>() << "): nonempty\n";
    } else {
      outcome = dpfi::io::run_experiment(cfg, o.threads ? o.threads : dpfi::default_threads());
    }
    for (const auto& msg : outcome.messages) { std::cerr << msg << '\n'; }
    outcome.bundle.write(cfg.output_dir, resolved);
    std::cout << "wrote " << outcome.bundle.files().size() + 1 << " files to " << cfg.output_dir << '\n';
    return outcome.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* ce = dynamic_cast<const dpfi::ConvergenceError*>(&e); ce && !ce->trace().empty()) {
      std::cerr << "last monitored value: " << ce->trace().back() << " after " << ce->trace().size() << " records\n";
    }
    return dpfi::io::exit_code(e);
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Robust Nash equilibria for dynamic pricing with fixed inventories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpfi::version);

  Options o;
  using K = dpfi::io::ExperimentKind;
  struct Sub
  {
    const char* name;
    const char* help;
    std::optional<K> kind;
  };
  const Sub subs[] = {{"solve", "compute one equilibrium", K::solve},
                      {"matrix", "nominal/robust policy matrix with Monte Carlo profits", K::matrix},
                      {"sweep", "sensitivity of the equilibrium to one coefficient", K::sweep},
                      {"robustness", "profit distribution as the assumed margin varies", K::robustness}};
  std::vector<std::pair<CLI::App*, std::optional<K>>> cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, o, true);
    cmds.emplace_back(cmd, s.kind);
  }
  auto* reproduce = app.add_subcommand("reproduce", "run a built-in example");
  std::string names;
  for (const auto& n : dpfi::io::preset_names()) { names += (names.empty() ? "" : ", ") + n; }
  reproduce->add_option("preset", o.preset, "one of: " + names)->required();
  add_common(reproduce, o, false);
  auto* check = app.add_subcommand("check", "check assumptions and feasibility only");
  add_common(check, o, false);
  check->add_option("--preset", o.preset, "check a built-in example instead of a config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dpfi::io::exit_config;
  }

  if (*reproduce) {
    if (!o.config.empty()) {
      std::cerr << "error: reproduce takes a preset name, not --config\n";
      return dpfi::io::exit_config;
    }
    try {
      (void)dpfi::io::preset(o.preset);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return dpfi::io::exit_config;
    }
    return run(o, std::nullopt, false);
  }
  if (*check) {
    if (o.config.empty() == o.preset.empty()) {
      std::cerr << "error: check needs exactly one of --config or --preset\n";
      return dpfi::io::exit_config;
    }
    return run(o, std::nullopt, true);
  }
  for (const auto& [cmd, kind] : cmds) {
    if (*cmd) { return run(o, kind, false); }
  }
  return dpfi::io::exit_config;
}
