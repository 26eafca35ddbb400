// SPDX-License-Identifier: Apache-2.0
// Command-line front end: simulate, bounds, optimize-pzf, selftest.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "d2dmimo/harness.hpp"
#include "d2dmimo/selftest.hpp"

namespace {

using namespace d2dmimo;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct CommonArgs {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_seed) {
  cmd->add_option("--preset", a.preset, "experiment preset")->check(CLI::IsMember(preset_names()));
  cmd->add_option("--config", a.config_file, "INI-style config file applied after the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--override", a.overrides, "key=value, applied last (repeatable)");
  cmd->add_option("--workers", a.workers, "worker threads (0 = hardware)");
  if (with_seed) cmd->add_option("--seed", a.seed, "master seed")->each([&](const std::string&) { a.seed_set = true; });
}

ExperimentConfig build_config(const CommonArgs& a) {
  ExperimentConfig cfg = a.preset.empty() ? ExperimentConfig{} : preset(a.preset);
  if (!a.config_file.empty()) load_config_file(cfg, a.config_file);
  for (const auto& o : a.overrides) apply_override(cfg, o);
  if (a.seed_set) cfg.master_seed = a.seed;
  if (a.workers >= 0) cfg.workers = static_cast<unsigned>(a.workers);
  cfg.validate();
  return cfg;
}

void report_point_errors(const std::vector<SeResult>& rs) {
  for (const auto& r : rs)
    if (!r.error.empty()) std::cerr << "warning: sweep " << r.sweep << ": " << r.error << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f.flush()) throw Error("write to '" + path + "' failed");
}

int cmd_simulate(const CommonArgs& a) {
  const ExperimentConfig cfg = build_config(a);
  const auto rs = run_experiment(cfg);
  report_point_errors(rs);
  if (a.out.empty() || a.out == "-")
    std::cout << format_csv(rs);
  else
    emit_csv(rs, a.out);
  return kOk;
}

int cmd_bounds(const CommonArgs& a) {
  const ExperimentConfig cfg = build_config(a);
  if (cfg.resolved_analytic() == AnalyticKind::none)
    throw ConfigError("preset '" + cfg.preset + "' defines no analytic curve; set analytic.kind");
  RunOptions opts;
  opts.simulate = false;
  const auto rs = run_experiment(cfg, opts);
  report_point_errors(rs);
  if (a.out.empty() || a.out == "-")
    std::cout << format_csv(rs);
  else
    emit_csv(rs, a.out);
  return kOk;
}

int cmd_optimize(const CommonArgs& a) {
  const ExperimentConfig cfg = build_config(a);
  const OptimizeResult res = optimize_pzf(cfg);
  std::string text = "m_c,m_d,sum_se,ci\n";
  char buf[128];
  for (const auto& g : res.grid) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%.9g\n", g.m_c, g.m_d, g.sum_se, g.ci);
    text += buf;
  }
  write_text(a.out, text);
  std::cerr << "best (m_c, m_d) = (" << res.best.m_c << ", " << res.best.m_d << "), sum SE " << res.best.sum_se
            << " bits/s/Hz\n";
  return kOk;
}

int cmd_selftest() {
  const auto checks = run_selftest(std::cout);
  for (const auto& c : checks)
    if (!c.passed) return kRuntimeError;
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell massive MIMO uplink with D2D underlay: Monte Carlo and analytic SE"};
  app.require_subcommand(1);

  CommonArgs sim_args, bound_args, opt_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo sweep with analytic overlay, CSV out");
  add_common(sim, sim_args, true);
  sim->add_option("--out", sim_args.out, "CSV path ('-' for stdout)");

  auto* bounds = app.add_subcommand("bounds", "analytic curve only, CSV out");
  add_common(bounds, bound_args, true);
  bounds->add_option("--out", bound_args.out, "CSV path ('-' for stdout)");

  auto* opt = app.add_subcommand("optimize-pzf", "grid search of (m_c, m_d) for the cell-0 sum SE");
  add_common(opt, opt_args, true);
  opt->add_option("--out", opt_args.out, "grid CSV path ('-' for stdout)");

  app.add_subcommand("selftest", "fast property checks");
  app.add_subcommand("presets", "list preset names");
  app.add_subcommand("keys", "list configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (bounds->parsed()) return cmd_bounds(bound_args);
    if (opt->parsed()) return cmd_optimize(opt_args);
    if (app.got_subcommand("selftest")) return cmd_selftest();
    if (app.got_subcommand("presets")) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return kOk;
    }
    if (app.got_subcommand("keys")) {
      std::cout << describe_keys();
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
