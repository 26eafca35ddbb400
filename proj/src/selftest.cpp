// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "d2dmimo/analytic.hpp"
#include "d2dmimo/csi.hpp"
#include "d2dmimo/harness.hpp"
#include "d2dmimo/pzf.hpp"
#include "d2dmimo/quadrature.hpp"

namespace d2dmimo {
namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Full PZF on sampled vectors against the closed-form laws.
SelfTestCheck fading_laws() {
  const std::size_t dim = 16, mc = 2, md = 3, n = 20000;
  LinkGains g;
  g.desired_coeff = 1.0;
  g.noise = 1.0;
  for (std::size_t i = 0; i < 4; ++i) g.cellular.push_back({i, 1.0 + i, 1.0});
  for (std::size_t i = 0; i < 5; ++i) g.d2d.push_back({i, 1.0 + i, 1.0});
  const PzfParams p{mc, md, dim};
  Stream rng(derive_seed(7, {1}));
  double sig = 0.0, interf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SinrBreakdown b = sample_full_sinr<double>(g, p, rng);
    sig += b.signal;
    interf += b.interference();
  }
  sig /= n;
  interf /= n;
  // 2 + 2 uncanceled interferers with unit coefficients
  const double want_sig = static_cast<double>(dim - mc - md);
  const bool ok = std::abs(sig / want_sig - 1.0) < 0.02 && std::abs(interf / 4.0 - 1.0) < 0.04;
  return {"full PZF desired/interferer gains", ok,
          "mean desired " + fmt(sig) + " (want " + fmt(want_sig) + "), mean interference " + fmt(interf) + " (want 4)"};
}

SelfTestCheck rho_scaling() {
  bool ok = true;
  double worst = 0.0;
  for (double alpha : {3.0, 3.76, 4.37})
    for (std::size_t m : {2u, 3u, 5u}) {
      RhoParams p{m, alpha, 1e-5, 1e-3, 1.0, 1e-12};
      const double r1 = rho(p);
      p.lambda *= 4.0;
      const double r4 = rho(p);
      const double err = std::abs(r4 / (r1 * std::pow(4.0, alpha / 2.0)) - 1.0);
      worst = std::max(worst, err);
      ok = ok && err < 1e-12;
    }
  return {"rho(4 lambda) = 4^(alpha/2) rho(lambda)", ok, "max relative error " + fmt(worst)};
}

SelfTestCheck laplace_table() {
  double worst = 0.0;
  for (double sigma : {4.0, 7.0})
    for (double zc : {1e-6, 1e-2, 1.0, 30.0}) {
      const double s = sigma * std::log(10.0) / 10.0;
      QuadratureOptions opt;
      opt.rel_tol = 1e-11;
      const double direct =
          integrate(
              [&](double x) {
                const double xi2 = std::exp(2.0 * s * x);
                return std::exp(-0.5 * x * x - zc * xi2) / std::sqrt(2.0 * M_PI);
              },
              -12.0, 12.0, opt)
              .value;
      worst = std::max(worst, std::abs(lognormal_square_laplace(zc, sigma) / direct - 1.0));
    }
  return {"lognormal Laplace table vs direct quadrature", worst < 1e-6, "max relative error " + fmt(worst)};
}

SelfTestCheck mmse_error() {
  ExperimentConfig cfg = preset("fig7");
  cfg.d2d_load = 4.0;
  const CellLayout layout = build_hex_layout(cfg.rings, cfg.cell_radius);
  DropParams dp;
  dp.d2d_intensity = cfg.lambda();
  dp.region_multiplier = cfg.region_multiplier;
  const NetworkDrop drop = make_drop(layout, dp, derive_seed(11, {0}));
  const LinkBudget b = cfg.base_budget();
  const BsLargeScale ls = central_bs_large_scale(drop, b);
  const TrainingPlan plan = make_training_plan(drop, 0);
  const PilotBook pilots = make_pilots(b.T_c, plan.pilots_needed());
  const LinkStatistics st = cellular_link_statistics(drop, ls, plan, b, 0, TrainingMode::active);
  Stream rng(derive_seed(11, {1}));
  const Eigen::Index M = 8;
  const auto own = static_cast<Eigen::Index>(drop.cellular_index(0, 0));
  double err = 0.0;
  const int reps = 3000;
  for (int r = 0; r < reps; ++r) {
    const BsChannels h = sample_bs_channels(ls, M, rng);
    const CMatrixXd Y = training_rx(h, ls, b, pilots, plan, TrainingMode::active, rng);
    const MmseEstimate e = mmse_estimate(Y, pilots.column(0), st);
    err += (h.cellular.col(own) - e.h_hat).squaredNorm();
  }
  err /= static_cast<double>(reps * M);
  const double want = 1.0 - st.xi();
  return {"MMSE error variance = 1 - xi", std::abs(err / want - 1.0) < 0.05,
          "empirical " + fmt(err) + ", predicted " + fmt(want)};
}

SelfTestCheck determinism() {
  ExperimentConfig cfg = preset("fig2");
  cfg.sweep_values = {40, 100};
  cfg.drops = 6;
  cfg.fades = 4;
  cfg.workers = 1;
  const std::string a = format_csv(run_experiment(cfg));
  cfg.workers = 4;
  const std::string b = format_csv(run_experiment(cfg));
  return {"CSV identical at 1 and 4 workers", a == b, a == b ? "byte-identical" : "outputs differ"};
}

SelfTestCheck csv_round_trip() {
  std::vector<SeResult> rs(2);
  rs[0] = {1.0, 3.14159265358979, 0.01234567891, 2.718281828459, 0.0, 17, ""};
  rs[1] = {2.5, 1e-7, 0.0, 123456.789012345, 0.0, 3, ""};
  const std::string csv = format_csv(rs);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  bool ok = line == "sweep,sim_se,ci,analytic_se,samples";
  for (const SeResult& r : rs) {
    std::getline(in, line);
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-8 * std::abs(y); };
    ok = ok && v.size() == 5 && close(v[0], r.sweep) && close(v[1], r.sim_se) && close(v[2], r.ci) &&
         close(v[3], r.analytic_se) && v[4] == static_cast<double>(r.samples);
  }
  return {"CSV round trip at 9 significant digits", ok, ok ? "values recovered" : "mismatch"};
}

} // namespace

std::vector<SelfTestCheck> run_selftest(std::ostream& log) {
  const std::vector<std::pair<const char*, std::function<SelfTestCheck()>>> checks = {
      {"fading", fading_laws},     {"rho", rho_scaling},           {"laplace", laplace_table},
      {"mmse", mmse_error},        {"determinism", determinism},   {"csv", csv_round_trip}};
  std::vector<SelfTestCheck> out;
  for (const auto& [label, check] : checks) {
    SelfTestCheck c;
    try {
      c = check();
    } catch (const std::exception& e) {
      c = {label, false, std::string("threw: ") + e.what()};
    }
    log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n" << std::flush;
    out.push_back(c);
  }
  return out;
}

} // namespace d2dmimo
