// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2dmimo/channel.hpp"
#include "d2dmimo/csi.hpp"
#include "d2dmimo/pzf.hpp"

namespace d2dmimo {

enum class SweepVar { none, M, m_c, m_d, K, N, n_d, lambda, D, pc_scale };
enum class MdRule { fixed, sqrt_m };
enum class CsiMode { perfect, estimated_active, estimated_silenced };
enum class PowerScaling { none, inverse_m, inverse_sqrt_m };
enum class AnalyticKind {
  automatic,
  none,
  cellular_bound,   // PZF lower bound at the BS
  d2d_bound,        // PZF lower bound at a D2D receiver
  scaled_limit,     // closed-form limit with P_c / M
  scaled_limit_mc,  // same limit, fading Monte Carlo over the residual shot noise
  silenced_limit,   // large-M limit with D2D silent during training
  contaminated      // large-M SE with active D2D training (Laplace-functional integral)
};
enum class SimTarget { cellular, d2d };

struct ExperimentConfig {
  std::string preset = "custom";
  SweepVar sweep_var = SweepVar::none;
  std::vector<double> sweep_values{0.0};

  std::size_t drops = 200;
  std::size_t fades = 50;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;  // 0: one per hardware thread

  int rings = 2;
  double cell_radius = 500.0;
  double region_multiplier = 3.0;
  std::size_t ues_per_cell = 4;
  double d2d_load = 12.0;  // pi R_c^2 lambda
  double d2d_distance = 20.0;

  double pc_dbm = 23.0;
  double pd_dbm = 13.0;
  double pc_scale = 1.0;
  double alpha_c = 3.76;
  double alpha_d = 4.37;
  double c_c0_db = 15.3;
  double c_d0_db = 38.5;
  double bandwidth_hz = 10e6;
  double noise_psd_dbm_hz = -174.0;
  double nf_bs_db = 6.0;
  double nf_ue_db = 9.0;
  double sigma_db = 7.0;
  int T_c = 4;

  PzfParams bs{0, 2, 100};
  MdRule md_rule = MdRule::fixed;
  PzfParams ue{0, 2, 4};

  CsiMode csi = CsiMode::perfect;
  std::size_t coordinated_d2d = 0;
  PowerScaling scaling = PowerScaling::none;

  SimTarget target = SimTarget::cellular;
  FadingMode fading = FadingMode::projected;
  bool simulate = true;
  AnalyticKind analytic = AnalyticKind::automatic;

  std::size_t opt_mc_max = 4;
  std::size_t opt_md_max = 8;
  bool opt_use_bound = false;

  double lambda() const;
  /// Budget before any M-dependent power scaling (pc_scale applied).
  LinkBudget base_budget() const;
  /// Budget with the configured P_c / M or P_c / sqrt(M) applied.
  LinkBudget effective_budget() const;
  AnalyticKind resolved_analytic() const;
  void validate() const;
};

/// Settings use flat dotted keys (`bs.antennas`) or short aliases (`M`).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// `key=value` override; whitespace around either side is ignored.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);
/// INI-like text: `[section]` headers prefix the following keys with
/// `section.`; `#` and `;` start comments.
void load_config(ExperimentConfig& cfg, std::istream& in, const std::string& origin = "<config>");
void load_config_file(ExperimentConfig& cfg, const std::string& path);
std::string describe_keys();

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

/// Config for sweep point `index` with the sweep variable and derived
/// quantities (sqrt-M cancellation) applied.
ExperimentConfig at_sweep_point(const ExperimentConfig& cfg, std::size_t index);

struct SeResult {
  double sweep = 0.0;
  double sim_se = 0.0;
  double ci = 0.0;
  double analytic_se = 0.0;
  double analytic_ci = 0.0;
  std::size_t samples = 0;
  std::string error;  // non-empty for a failed sweep point
};

struct RunOptions {
  bool simulate = true;
  bool analytic = true;
};

std::vector<SeResult> run_experiment(const ExperimentConfig& cfg, RunOptions opts = {});

struct PzfGridPoint {
  std::size_t m_c = 0;
  std::size_t m_d = 0;
  double sum_se = 0.0;
  double ci = 0.0;
};

struct OptimizeResult {
  std::vector<PzfGridPoint> grid;
  PzfGridPoint best;
};

/// Exhaustive search over m_c in [0, opt_mc_max], m_d in [0, opt_md_max]
/// maximizing the sum cellular SE of cell 0 (simulated or bound-based).
/// Ties go to the smallest m_c + m_d, then the smallest m_c.
OptimizeResult optimize_pzf(const ExperimentConfig& cfg);

std::string format_csv(const std::vector<SeResult>& results);
void emit_csv(const std::vector<SeResult>& results, const std::string& path);

/// Runs fn(i) for i in [0, n) on `workers` threads. Work is handed out by an
/// atomic counter; callers write into pre-sized slots so the schedule never
/// affects results.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

} // namespace d2dmimo
