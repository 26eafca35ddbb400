// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "d2dmimo/harness.hpp"

using namespace d2dmimo;

namespace {

ExperimentConfig tiny_cellular() {
  ExperimentConfig c;
  c.rings = 0;
  c.ues_per_cell = 1;
  c.d2d_load = 0.0;
  c.bs = {0, 0, 4};
  c.drops = 1;
  c.fades = 1;
  c.analytic = AnalyticKind::none;
  return c;
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

} // namespace

TEST_CASE("defaults follow the system table") {
  const ExperimentConfig c;
  const LinkBudget b = c.base_budget();
  const LinkBudget t = LinkBudget::defaults();
  CHECK(b.P_c == doctest::Approx(t.P_c));
  CHECK(b.P_d == doctest::Approx(t.P_d));
  CHECK(b.N0_bs == doctest::Approx(t.N0_bs));
  CHECK(b.N0_ue == doctest::Approx(t.N0_ue));
  CHECK(c.ues_per_cell == 4);
  CHECK(c.bs.antennas == 100);
  CHECK(c.ue.antennas == 4);
  CHECK(c.sigma_db == 7.0);
  CHECK(c.d2d_load == 12.0);
  CHECK(c.cell_radius == 500.0);
  CHECK(c.lambda() == doctest::Approx(12.0 / (M_PI * 250000.0)));
}

TEST_CASE("presets") {
  const ExperimentConfig f2 = preset("fig2");
  CHECK(f2.ues_per_cell == 4);
  CHECK(f2.bs.antennas == 100);
  CHECK(f2.sigma_db == 7.0);
  CHECK(f2.pc_dbm == 23.0);
  CHECK(f2.pd_dbm == 13.0);
  CHECK(f2.sweep_var == SweepVar::M);
  const ExperimentConfig f5 = preset("fig5");
  CHECK(f5.ue.cancel_cellular == 0);
  CHECK(f5.ue.cancel_d2d == 0);
  CHECK(f5.target == SimTarget::d2d);
  const ExperimentConfig f7 = preset("fig7");
  CHECK(f7.T_c == 4);
  CHECK(f7.bs.cancel_cellular == 0);
  CHECK(f7.bs.cancel_d2d == 0);
  CHECK(f7.csi == CsiMode::estimated_active);
  const ExperimentConfig f3 = preset("fig3");
  CHECK(f3.ue.cancel_cellular == 0);
  CHECK(f3.ue.cancel_d2d == 2);
  CHECK(preset("fig4").scaling == PowerScaling::inverse_m);
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
  try {
    preset("fig6");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("props-suite") != std::string::npos);
  }
}

TEST_CASE("config text") {
  ExperimentConfig c;
  std::istringstream in(
      "# comment line\n"
      "preset = fig2\n"
      "[bs]\n"
      "antennas = 64   ; trailing comment\n"
      "cancel_d2d = 4\n"
      "[d2d]\n"
      "load = 8\n"
      "[sweep]\n"
      "var = N\n"
      "values = 4, 6,8\n"
      "[run]\n"
      "seed = 99\n");
  load_config(c, in);
  CHECK(c.preset == "fig2");
  CHECK(c.bs.antennas == 64);
  CHECK(c.bs.cancel_d2d == 4);
  CHECK(c.bs.cancel_cellular == 3);
  CHECK(c.d2d_load == 8.0);
  CHECK(c.sweep_var == SweepVar::N);
  CHECK(c.sweep_values == std::vector<double>{4, 6, 8});
  CHECK(c.master_seed == 99);

  apply_override(c, "M = 200");
  CHECK(c.bs.antennas == 200);
  apply_override(c, "alpha_c=3.5");
  CHECK(c.alpha_c == 3.5);
  CHECK_THROWS_AS(apply_override(c, "no_such_key=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "M=abc"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "M"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "csi.mode=sometimes"), ConfigError);
  std::istringstream bad("[bs\nantennas=3\n");
  CHECK_THROWS_AS(load_config(c, bad), ConfigError);
  CHECK_THROWS_AS(load_config_file(c, "/nonexistent/file.ini"), ConfigError);

  const std::string keys = describe_keys();
  for (const char* k : {"cellular.power_dbm", "d2d.power_dbm", "cellular.pathloss_exponent", "d2d.pathloss_exponent",
                        "cellular.pathloss_ref_db", "d2d.pathloss_ref_db", "noise.psd_dbm_hz", "noise.bandwidth_hz",
                        "noise.bs_figure_db", "noise.ue_figure_db", "channel.shadowing_db", "cellular.ues_per_cell",
                        "bs.antennas", "ue.antennas", "d2d.load", "d2d.distance", "geometry.cell_radius",
                        "csi.training_length"})
    CHECK(keys.find(k) != std::string::npos);
}

TEST_CASE("validation") {
  ExperimentConfig c;
  c.drops = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.sweep_values.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fig7");
  c.bs.cancel_d2d = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fig7");
  c.T_c = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = preset("fig2");
  c.analytic = AnalyticKind::contaminated;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sweep points") {
  ExperimentConfig c = preset("fig4");
  c.md_rule = MdRule::sqrt_m;
  const ExperimentConfig p = at_sweep_point(c, 2);  // M = 64
  CHECK(p.bs.antennas == 64);
  CHECK(p.bs.cancel_d2d == 8);
  CHECK(p.effective_budget().P_c == doctest::Approx(p.base_budget().P_c / 64.0));
  c.scaling = PowerScaling::inverse_sqrt_m;
  CHECK(at_sweep_point(c, 2).effective_budget().P_c == doctest::Approx(p.base_budget().P_c / 8.0));
  c.sweep_values = {2.5};
  CHECK_THROWS_AS(at_sweep_point(c, 0), ConfigError);
}

TEST_CASE("smallest pipeline reproduces by hand") {
  const ExperimentConfig c = tiny_cellular();
  const auto rs = run_experiment(c);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].samples == 1);

  DropParams dp;
  dp.ues_per_cell = 1;
  dp.d2d_intensity = 0.0;
  const NetworkDrop drop = make_drop(build_hex_layout(0, 500), dp, derive_seed(c.master_seed, {0, 0, 0}));
  const LinkGains g = link_gains(drop, Target::cellular(0), c.effective_budget());
  Stream fading(derive_seed(c.master_seed, {0, 0, 1}));
  const double x = fading.gamma(4.0);
  CHECK(rs[0].sim_se == doctest::Approx(std::log2(1.0 + g.desired_snr() * x)).epsilon(1e-14));
}

TEST_CASE("determinism and per-point isolation") {
  ExperimentConfig c = preset("fig2");
  c.sweep_values = {40, 100};
  c.drops = 8;
  c.fades = 3;
  c.workers = 1;
  const std::string one = format_csv(run_experiment(c));
  c.workers = 3;
  CHECK(format_csv(run_experiment(c)) == one);
  c.workers = 8;
  CHECK(format_csv(run_experiment(c)) == one);

  ExperimentConfig other = c;
  other.sweep_values = {40, 300};
  const auto a = run_experiment(c);
  const auto b = run_experiment(other);
  CHECK(a[0].sim_se == b[0].sim_se);
  CHECK(a[0].analytic_se == b[0].analytic_se);
  CHECK(a[1].sim_se != b[1].sim_se);
}

TEST_CASE("infeasible sweep point becomes an error row") {
  ExperimentConfig c = preset("fig2");
  c.sweep_values = {4, 40};
  c.drops = 3;
  c.fades = 2;
  const auto rs = run_experiment(c);
  REQUIRE(rs.size() == 2);
  CHECK(!rs[0].error.empty());
  CHECK(std::isnan(rs[0].sim_se));
  CHECK(rs[0].samples == 0);
  CHECK(rs[1].error.empty());
  CHECK(rs[1].samples == 3 * 2 * 4);
  CHECK(rs[1].ci >= 0.0);
}

TEST_CASE("confidence intervals cover the truth about 95% of the time") {
  ExperimentConfig c = tiny_cellular();
  c.drops = 300000;
  c.fades = 1;
  const auto truth_run = run_experiment(c);
  const double truth = truth_run[0].sim_se;
  CHECK(truth_run[0].ci < 0.02);  // negligible next to the 40-drop intervals (~1 bit)
  c.drops = 40;
  c.fades = 4;
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    c.master_seed = 1000 + seed;
    const SeResult r = run_experiment(c)[0];
    covered += std::abs(r.sim_se - truth) <= r.ci ? 1 : 0;
  }
  CHECK(covered >= 182);
  CHECK(covered <= 198);
}

TEST_CASE("csv output") {
  CHECK(format_csv({}) == "sweep,sim_se,ci,analytic_se,samples\n");
  std::vector<SeResult> rs(2);
  rs[0] = {20, 3.0184619412345, 0.55045270001, 2.5159269512345, 0, 3200, ""};
  rs[1] = {40, 1.0 / 3.0, 0.0, 1e-9, 0, 1, ""};
  const std::string text = format_csv(rs);
  CHECK(text.find('\r') == std::string::npos);
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(rows[i][0] == rs[i].sweep);
    CHECK(rows[i][1] == doctest::Approx(rs[i].sim_se).epsilon(1e-8));
    CHECK(rows[i][3] == doctest::Approx(rs[i].analytic_se).epsilon(1e-8));
    CHECK(rows[i][4] == static_cast<double>(rs[i].samples));
  }
  CHECK(text.find("3.01846194,") != std::string::npos);

  const std::string path = "harness_test_out.csv";
  emit_csv({}, path);
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == "sweep,sim_se,ci,analytic_se,samples\n");
  std::remove(path.c_str());
  try {
    emit_csv(rs, "/nonexistent-dir/out.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/out.csv") != std::string::npos);
  }

  ExperimentConfig c = preset("fig2");
  c.drops = 2;
  c.fades = 1;
  const auto fig2 = parse_csv(format_csv(run_experiment(c)));
  REQUIRE(fig2.size() == c.sweep_values.size());
  for (std::size_t i = 0; i < fig2.size(); ++i) CHECK(fig2[i][0] == c.sweep_values[i]);
}

TEST_CASE("parallel_for") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 63) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("PZF optimizer") {
  ExperimentConfig c = preset("fig8");
  c.drops = 60;
  c.fades = 8;
  SUBCASE("a single grid point is the answer") {
    c.opt_mc_max = 0;
    c.opt_md_max = 0;
    const OptimizeResult r = optimize_pzf(c);
    CHECK(r.grid.size() == 1);
    CHECK(r.best.m_c == 0);
    CHECK(r.best.m_d == 0);
  }
  SUBCASE("cellular cancellation gains and agreement with the bound objective") {
    const OptimizeResult sim = optimize_pzf(c);
    auto at = [&](std::size_t mc, std::size_t md) {
      for (const auto& g : sim.grid)
        if (g.m_c == mc && g.m_d == md) return g.sum_se;
      return std::nan("");
    };
    const double big = at(3, 2) - at(0, 2);
    const double marginal = at(4, 2) - at(3, 2);
    CHECK(big > 3.0);
    CHECK(marginal > 0.0);
    CHECK(marginal < 0.25 * big);
    c.opt_use_bound = true;
    const OptimizeResult bound = optimize_pzf(c);
    CHECK(std::abs(static_cast<long>(bound.best.m_c) - static_cast<long>(sim.best.m_c)) <= 1);
    CHECK(std::abs(static_cast<long>(bound.best.m_d) - static_cast<long>(sim.best.m_d)) <= 1);
  }
}
