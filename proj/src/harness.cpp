// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "d2dmimo/analytic.hpp"
#include "d2dmimo/netgeom.hpp"

namespace d2dmimo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Phase : std::uint64_t { kDropPhase = 0, kFadingPhase = 1, kAnalyticPhase = 2 };

// Per-drop partial sums; drops are the independent clusters of the estimator.
struct DropTally {
  double sim_sum = 0.0;
  double sim_sq = 0.0;
  std::size_t sim_count = 0;
  double ana_sum = 0.0;
  double ana_sq = 0.0;
  std::size_t ana_count = 0;

  void add_sim(double se) {
    sim_sum += se;
    sim_sq += se * se;
    ++sim_count;
  }
  void add_analytic(double se) {
    ana_sum += se;
    ana_sq += se * se;
    ++ana_count;
  }
};

struct ClusterMean {
  double mean = kNaN;
  double ci = kNaN;
  std::size_t samples = 0;
};

// Ratio estimator over drops. Samples within a drop share geometry, so the
// variance is taken across drop totals; with a single drop it falls back to
// the i.i.d. sample variance.
ClusterMean cluster_mean(const std::vector<DropTally>& tallies, bool analytic) {
  KahanSum s, c, sq;
  for (const auto& t : tallies) {
    s.add(analytic ? t.ana_sum : t.sim_sum);
    sq.add(analytic ? t.ana_sq : t.sim_sq);
    c.add(static_cast<double>(analytic ? t.ana_count : t.sim_count));
  }
  ClusterMean out;
  const double total = c.value();
  out.samples = static_cast<std::size_t>(total);
  if (total <= 0.0) return out;
  out.mean = s.value() / total;
  const auto n = static_cast<double>(tallies.size());
  double var = 0.0;
  if (tallies.size() > 1) {
    KahanSum dev;
    for (const auto& t : tallies) {
      const double r = (analytic ? t.ana_sum : t.sim_sum) -
                       out.mean * static_cast<double>(analytic ? t.ana_count : t.sim_count);
      dev.add(r * r);
    }
    var = n / (n - 1.0) * dev.value() / (total * total);
  } else if (total > 1.0) {
    var = std::max(0.0, sq.value() / total - out.mean * out.mean) / (total - 1.0);
  }
  out.ci = 1.96 * std::sqrt(var);
  return out;
}

struct PointPlan {
  ExperimentConfig cfg;
  LinkBudget effective;
  LinkBudget base;
  AnalyticKind analytic = AnalyticKind::none;
  std::string error;
};

std::size_t total_cellular(const ExperimentConfig& c) {
  const std::size_t cells = 1 + 3 * static_cast<std::size_t>(c.rings) * static_cast<std::size_t>(c.rings + 1);
  return cells * c.ues_per_cell;
}

PointPlan plan_point(const ExperimentConfig& cfg, std::size_t index) {
  PointPlan p;
  p.cfg = at_sweep_point(cfg, index);
  p.cfg.validate();
  p.effective = p.cfg.effective_budget();
  p.base = p.cfg.base_budget();
  p.analytic = p.cfg.resolved_analytic();
  const ExperimentConfig& c = p.cfg;
  if (c.target == SimTarget::cellular) {
    if (!feasible_at_bs(c.bs, total_cellular(c)))
      p.error = "infeasible BS PZF (m_c=" + std::to_string(c.bs.cancel_cellular) +
                ", m_d=" + std::to_string(c.bs.cancel_d2d) + ", M=" + std::to_string(c.bs.antennas) + ")";
  } else if (!feasible_at_ue(c.ue, total_cellular(c))) {
    p.error = "infeasible UE PZF (n_c=" + std::to_string(c.ue.cancel_cellular) +
              ", n_d=" + std::to_string(c.ue.cancel_d2d) + ", N=" + std::to_string(c.ue.antennas) + ")";
  }
  return p;
}

void run_perfect_drop(const PointPlan& p, const NetworkDrop& drop, bool simulate, bool analytic,
                      Stream& fading_rng, Stream& analytic_rng, DropTally& tally) {
  const ExperimentConfig& c = p.cfg;
  const bool cellular = c.target == SimTarget::cellular;
  const PzfParams& params = cellular ? c.bs : c.ue;
  std::vector<Target> targets;
  if (cellular) {
    for (std::size_t k = 0; k < c.ues_per_cell; ++k) targets.push_back(Target::cellular(k));
  } else {
    for (std::size_t r : drop.central_d2d_receivers()) targets.push_back(Target::d2d(r));
  }
  const double lambda = c.lambda();
  for (const Target& t : targets) {
    const LinkGains gains = link_gains(drop, t, p.effective);
    if (simulate)
      for (std::size_t f = 0; f < c.fades; ++f)
        tally.add_sim(se_bits(sample_sinr(gains, params, c.fading, fading_rng).sinr));
    if (!analytic) continue;
    switch (p.analytic) {
      case AnalyticKind::cellular_bound:
        tally.add_analytic(cellular_se_lower_bound(gains, params, p.effective, lambda));
        break;
      case AnalyticKind::d2d_bound: tally.add_analytic(d2d_se_lower_bound(gains, params, p.effective, lambda)); break;
      case AnalyticKind::scaled_limit: {
        const LinkGains g = link_gains(drop, t, p.base);
        const RhoParams rp = cellular ? rho_params_at_bs(p.base, lambda, params.cancel_d2d)
                                      : rho_params_at_ue(p.base, lambda, params.cancel_d2d);
        tally.add_analytic(asymptotic_se_bound(g.desired_snr(), rho(rp)));
        break;
      }
      case AnalyticKind::scaled_limit_mc: {
        const LinkGains g = link_gains(drop, t, p.base);
        for (std::size_t f = 0; f < c.fades; ++f)
          tally.add_analytic(power_scaled_limit_sample(g, params.cancel_d2d, analytic_rng));
        break;
      }
      case AnalyticKind::contaminated:
      case AnalyticKind::silenced_limit:
        throw ConfigError("analytic kind requires estimated CSI");
      case AnalyticKind::automatic:
      case AnalyticKind::none: break;
    }
  }
}

void run_estimated_drop(const PointPlan& p, const NetworkDrop& drop, bool simulate, bool analytic,
                        Stream& fading_rng, DropTally& tally) {
  const ExperimentConfig& c = p.cfg;
  if (simulate) {
    const BsLargeScale ls = central_bs_large_scale(drop, p.effective);
    const TrainingPlan plan = make_training_plan(drop, c.coordinated_d2d);
    const PilotBook pilots = make_pilots(c.T_c, plan.pilots_needed());
    const TrainingMode mode =
        c.csi == CsiMode::estimated_active ? TrainingMode::active : TrainingMode::silenced;
    const auto M = static_cast<Eigen::Index>(c.bs.antennas);
    for (std::size_t f = 0; f < c.fades; ++f)
      for (const SinrBreakdown& b : sample_estimated_mrc(drop, ls, p.effective, pilots, plan, mode, M, fading_rng))
        tally.add_sim(se_bits(b.sinr));
  }
  if (!analytic) return;
  for (std::size_t k = 0; k < c.ues_per_cell; ++k) {
    switch (p.analytic) {
      case AnalyticKind::contaminated:
        tally.add_analytic(contaminated_se_integral(contamination_stats(drop, k, p.effective, c.lambda())));
        break;
      case AnalyticKind::silenced_limit: tally.add_analytic(se_bits(deactivated_training_sinr(drop, p.base, k))); break;
      case AnalyticKind::automatic:
      case AnalyticKind::none: break;
      default: throw ConfigError("analytic kind requires perfect CSI");
    }
  }
}

} // namespace

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto body = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        // Keep the failure with the lowest index so the reported error does
        // not depend on the schedule.
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

std::vector<SeResult> run_experiment(const ExperimentConfig& cfg, RunOptions opts) {
  cfg.validate();
  const std::size_t points = cfg.sweep_values.size();
  std::vector<PointPlan> plans;
  plans.reserve(points);
  for (std::size_t i = 0; i < points; ++i) plans.push_back(plan_point(cfg, i));

  std::vector<std::vector<DropTally>> tallies(points);
  std::vector<std::string> infeasible(points);
  std::vector<std::size_t> infeasible_drop(points, std::numeric_limits<std::size_t>::max());
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < points; ++i) {
    if (!plans[i].error.empty()) continue;
    tallies[i].resize(plans[i].cfg.drops);
    for (std::size_t d = 0; d < plans[i].cfg.drops; ++d) jobs.emplace_back(i, d);
  }
  std::vector<CellLayout> layouts;
  for (const auto& p : plans) layouts.push_back(build_hex_layout(p.cfg.rings, p.cfg.cell_radius));
  std::mutex infeasible_mutex;

  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    const auto [i, d] = jobs[j];
    const PointPlan& p = plans[i];
    const ExperimentConfig& c = p.cfg;
    DropParams dp;
    dp.ues_per_cell = c.ues_per_cell;
    dp.d2d_intensity = c.lambda();
    dp.d2d_distance = c.d2d_distance;
    dp.region_multiplier = c.region_multiplier;
    dp.shadowing_db = c.sigma_db;
    const NetworkDrop drop = make_drop(layouts[i], dp, derive_seed(c.master_seed, {i, d, kDropPhase}));
    Stream fading_rng(derive_seed(c.master_seed, {i, d, kFadingPhase}));
    Stream analytic_rng(derive_seed(c.master_seed, {i, d, kAnalyticPhase}));
    const bool simulate = opts.simulate && c.simulate;
    const bool analytic = opts.analytic && p.analytic != AnalyticKind::none;
    try {
      if (c.csi == CsiMode::perfect)
        run_perfect_drop(p, drop, simulate, analytic, fading_rng, analytic_rng, tallies[i][d]);
      else
        run_estimated_drop(p, drop, simulate, analytic, fading_rng, tallies[i][d]);
    } catch (const InfeasibleError& e) {
      std::lock_guard<std::mutex> lock(infeasible_mutex);
      if (d < infeasible_drop[i]) {
        infeasible_drop[i] = d;
        infeasible[i] = e.what();
      }
    }
  });

  std::vector<SeResult> out;
  out.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    SeResult r;
    r.sweep = cfg.sweep_var == SweepVar::none ? 0.0 : cfg.sweep_values[i];
    r.error = plans[i].error.empty() ? infeasible[i] : plans[i].error;
    if (!r.error.empty()) {
      r.sim_se = r.ci = r.analytic_se = r.analytic_ci = kNaN;
      out.push_back(r);
      continue;
    }
    const ClusterMean sim = cluster_mean(tallies[i], false);
    const ClusterMean ana = cluster_mean(tallies[i], true);
    r.sim_se = sim.mean;
    r.ci = sim.ci;
    r.analytic_se = ana.mean;
    r.analytic_ci = ana.ci;
    r.samples = sim.samples > 0 ? sim.samples : ana.samples;
    out.push_back(r);
  }
  return out;
}

OptimizeResult optimize_pzf(const ExperimentConfig& cfg) {
  ExperimentConfig base = at_sweep_point(cfg, 0);
  base.sweep_var = SweepVar::none;
  base.sweep_values = {0.0};
  base.md_rule = MdRule::fixed;
  base.target = SimTarget::cellular;
  base.csi = CsiMode::perfect;
  if (cfg.opt_use_bound) base.analytic = AnalyticKind::cellular_bound;
  base.validate();

  OptimizeResult res;
  bool have_best = false;
  const auto K = static_cast<double>(base.ues_per_cell);
  // Visit the grid by (m_c + m_d, m_c) so a strict improvement test gives the
  // documented tie-break.
  for (std::size_t total = 0; total <= cfg.opt_mc_max + cfg.opt_md_max; ++total) {
    for (std::size_t mc = 0; mc <= std::min(total, cfg.opt_mc_max); ++mc) {
      const std::size_t md = total - mc;
      if (md > cfg.opt_md_max) continue;
      ExperimentConfig c = base;
      c.bs.cancel_cellular = mc;
      c.bs.cancel_d2d = md;
      RunOptions opts;
      opts.simulate = !cfg.opt_use_bound;
      opts.analytic = cfg.opt_use_bound;
      const SeResult r = run_experiment(c, opts).front();
      if (!r.error.empty()) continue;
      PzfGridPoint g{mc, md, K * (cfg.opt_use_bound ? r.analytic_se : r.sim_se),
                     K * (cfg.opt_use_bound ? r.analytic_ci : r.ci)};
      res.grid.push_back(g);
      if (!have_best || g.sum_se > res.best.sum_se) {
        res.best = g;
        have_best = true;
      }
    }
  }
  if (!have_best) throw InfeasibleError("optimize_pzf: no feasible (m_c, m_d) in the search grid");
  return res;
}

std::string format_csv(const std::vector<SeResult>& results) {
  std::string out = "sweep,sim_se,ci,analytic_se,samples\n";
  char buf[160];
  for (const SeResult& r : results) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%zu\n", r.sweep, r.sim_se, r.ci, r.analytic_se, r.samples);
    out += buf;
  }
  return out;
}

void emit_csv(const std::vector<SeResult>& results, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << format_csv(results);
  f.flush();
  if (!f) throw Error("write to '" + path + "' failed");
}

} // namespace d2dmimo
