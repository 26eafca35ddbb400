// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "d2dmimo/harness.hpp"

namespace d2dmimo {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) { return static_cast<std::size_t>(to_u64(key, v)); }

int to_int(const std::string& key, const std::string& v) {
  const auto x = to_u64(key, v);
  if (x > 1'000'000) throw ConfigError(key + ": value out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

template <typename E>
E to_enum(const std::string& key, const std::string& v, const std::vector<std::pair<std::string, E>>& table) {
  for (const auto& [name, e] : table)
    if (name == v) return e;
  std::string names;
  for (const auto& [name, e] : table) names += (names.empty() ? "" : ", ") + name;
  throw ConfigError(key + ": unknown value '" + v + "' (expected one of: " + names + ")");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": list must not be empty");
  return out;
}

const std::vector<std::pair<std::string, SweepVar>>& sweep_names() {
  static const std::vector<std::pair<std::string, SweepVar>> t = {
      {"none", SweepVar::none}, {"M", SweepVar::M},           {"m_c", SweepVar::m_c},
      {"m_d", SweepVar::m_d},   {"K", SweepVar::K},           {"N", SweepVar::N},
      {"n_d", SweepVar::n_d},   {"lambda", SweepVar::lambda}, {"D", SweepVar::D},
      {"pc_scale", SweepVar::pc_scale}};
  return t;
}

using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);

struct KeySpec {
  const char* key;
  const char* alias;
  const char* help;
  Setter set;
};

// Every simulation parameter with its dotted key, optional short alias, and
// a one-line description for `describe_keys`.
const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> t = {
      {"sweep.var", nullptr, "none|M|m_c|m_d|K|N|n_d|lambda|D|pc_scale",
       [](auto& c, auto& k, auto& v) { c.sweep_var = to_enum(k, v, sweep_names()); }},
      {"sweep.values", nullptr, "comma-separated sweep values",
       [](auto& c, auto& k, auto& v) { c.sweep_values = to_list(k, v); }},
      {"run.drops", "drops", "network drops per sweep point",
       [](auto& c, auto& k, auto& v) { c.drops = to_size(k, v); }},
      {"run.fades", "fades", "fading realizations per drop",
       [](auto& c, auto& k, auto& v) { c.fades = to_size(k, v); }},
      {"run.seed", "seed", "master seed (u64)", [](auto& c, auto& k, auto& v) { c.master_seed = to_u64(k, v); }},
      {"run.workers", "workers", "worker threads, 0 = hardware",
       [](auto& c, auto& k, auto& v) { c.workers = static_cast<unsigned>(to_int(k, v)); }},
      {"geometry.rings", nullptr, "hexagon rings around cell 0 (2 gives 19 cells)",
       [](auto& c, auto& k, auto& v) { c.rings = to_int(k, v); }},
      {"geometry.cell_radius", "R_c", "hexagon side length, m",
       [](auto& c, auto& k, auto& v) { c.cell_radius = to_double(k, v); }},
      {"geometry.region_multiplier", nullptr, "PPP disk radius over layout circumradius",
       [](auto& c, auto& k, auto& v) { c.region_multiplier = to_double(k, v); }},
      {"cellular.ues_per_cell", "K", "cellular UEs per cell",
       [](auto& c, auto& k, auto& v) { c.ues_per_cell = to_size(k, v); }},
      {"cellular.power_dbm", "P_c", "cellular transmit power, dBm",
       [](auto& c, auto& k, auto& v) { c.pc_dbm = to_double(k, v); }},
      {"cellular.power_scale", "pc_scale", "linear factor on cellular power",
       [](auto& c, auto& k, auto& v) { c.pc_scale = to_double(k, v); }},
      {"cellular.pathloss_exponent", "alpha_c", "UE-BS pathloss exponent",
       [](auto& c, auto& k, auto& v) { c.alpha_c = to_double(k, v); }},
      {"cellular.pathloss_ref_db", "C_c0", "UE-BS pathloss reference, dB",
       [](auto& c, auto& k, auto& v) { c.c_c0_db = to_double(k, v); }},
      {"d2d.load", "lambda", "D2D load pi R_c^2 lambda", [](auto& c, auto& k, auto& v) { c.d2d_load = to_double(k, v); }},
      {"d2d.distance", "D", "D2D link distance, m", [](auto& c, auto& k, auto& v) { c.d2d_distance = to_double(k, v); }},
      {"d2d.power_dbm", "P_d", "D2D transmit power, dBm", [](auto& c, auto& k, auto& v) { c.pd_dbm = to_double(k, v); }},
      {"d2d.pathloss_exponent", "alpha_d", "UE-UE pathloss exponent",
       [](auto& c, auto& k, auto& v) { c.alpha_d = to_double(k, v); }},
      {"d2d.pathloss_ref_db", "C_d0", "UE-UE pathloss reference, dB",
       [](auto& c, auto& k, auto& v) { c.c_d0_db = to_double(k, v); }},
      {"noise.bandwidth_hz", nullptr, "channel bandwidth, Hz",
       [](auto& c, auto& k, auto& v) { c.bandwidth_hz = to_double(k, v); }},
      {"noise.psd_dbm_hz", nullptr, "noise PSD, dBm/Hz", [](auto& c, auto& k, auto& v) { c.noise_psd_dbm_hz = to_double(k, v); }},
      {"noise.bs_figure_db", nullptr, "BS noise figure, dB", [](auto& c, auto& k, auto& v) { c.nf_bs_db = to_double(k, v); }},
      {"noise.ue_figure_db", nullptr, "UE noise figure, dB", [](auto& c, auto& k, auto& v) { c.nf_ue_db = to_double(k, v); }},
      {"channel.shadowing_db", "sigma", "lognormal shadowing deviation, dB",
       [](auto& c, auto& k, auto& v) { c.sigma_db = to_double(k, v); }},
      {"bs.antennas", "M", "BS antennas", [](auto& c, auto& k, auto& v) { c.bs.antennas = to_size(k, v); }},
      {"bs.cancel_cellular", "m_c", "cellular interferers canceled at the BS",
       [](auto& c, auto& k, auto& v) { c.bs.cancel_cellular = to_size(k, v); }},
      {"bs.cancel_d2d", "m_d", "D2D interferers canceled at the BS",
       [](auto& c, auto& k, auto& v) { c.bs.cancel_d2d = to_size(k, v); }},
      {"bs.md_rule", nullptr, "fixed|sqrt (m_d = ceil(sqrt(M)))",
       [](auto& c, auto& k, auto& v) {
         c.md_rule = to_enum<MdRule>(k, v, {{"fixed", MdRule::fixed}, {"sqrt", MdRule::sqrt_m}});
       }},
      {"ue.antennas", "N", "D2D receiver antennas", [](auto& c, auto& k, auto& v) { c.ue.antennas = to_size(k, v); }},
      {"ue.cancel_cellular", "n_c", "cellular interferers canceled at a D2D receiver",
       [](auto& c, auto& k, auto& v) { c.ue.cancel_cellular = to_size(k, v); }},
      {"ue.cancel_d2d", "n_d", "D2D interferers canceled at a D2D receiver",
       [](auto& c, auto& k, auto& v) { c.ue.cancel_d2d = to_size(k, v); }},
      {"csi.mode", "csi", "perfect|estimated-active|estimated-silenced",
       [](auto& c, auto& k, auto& v) {
         c.csi = to_enum<CsiMode>(k, v,
                                  {{"perfect", CsiMode::perfect},
                                   {"estimated-active", CsiMode::estimated_active},
                                   {"estimated-silenced", CsiMode::estimated_silenced}});
       }},
      {"csi.training_length", "T_c", "pilot length, symbols", [](auto& c, auto& k, auto& v) { c.T_c = to_int(k, v); }},
      {"csi.coordinated_d2d", nullptr, "D2D transmitters trained per cell",
       [](auto& c, auto& k, auto& v) { c.coordinated_d2d = to_size(k, v); }},
      {"power.scaling", "scaling", "none|inverse-m|inverse-sqrt-m",
       [](auto& c, auto& k, auto& v) {
         c.scaling = to_enum<PowerScaling>(k, v,
                                           {{"none", PowerScaling::none},
                                            {"inverse-m", PowerScaling::inverse_m},
                                            {"inverse-sqrt-m", PowerScaling::inverse_sqrt_m}});
       }},
      {"sim.target", "target", "cellular|d2d",
       [](auto& c, auto& k, auto& v) {
         c.target = to_enum<SimTarget>(k, v, {{"cellular", SimTarget::cellular}, {"d2d", SimTarget::d2d}});
       }},
      {"sim.fading", "fading", "projected|full",
       [](auto& c, auto& k, auto& v) {
         c.fading = to_enum<FadingMode>(k, v, {{"projected", FadingMode::projected}, {"full", FadingMode::full}});
       }},
      {"sim.enabled", nullptr, "run the Monte Carlo simulation",
       [](auto& c, auto& k, auto& v) { c.simulate = to_bool(k, v); }},
      {"analytic.kind", "analytic",
       "auto|none|cellular-bound|d2d-bound|scaled-limit|scaled-limit-mc|silenced-limit|contaminated",
       [](auto& c, auto& k, auto& v) {
         c.analytic = to_enum<AnalyticKind>(k, v,
                                            {{"auto", AnalyticKind::automatic},
                                             {"none", AnalyticKind::none},
                                             {"cellular-bound", AnalyticKind::cellular_bound},
                                             {"d2d-bound", AnalyticKind::d2d_bound},
                                             {"scaled-limit", AnalyticKind::scaled_limit},
                                             {"scaled-limit-mc", AnalyticKind::scaled_limit_mc},
                                             {"silenced-limit", AnalyticKind::silenced_limit},
                                             {"contaminated", AnalyticKind::contaminated}});
       }},
      {"optimize.mc_max", nullptr, "largest m_c in the search grid",
       [](auto& c, auto& k, auto& v) { c.opt_mc_max = to_size(k, v); }},
      {"optimize.md_max", nullptr, "largest m_d in the search grid",
       [](auto& c, auto& k, auto& v) { c.opt_md_max = to_size(k, v); }},
      {"optimize.objective", nullptr, "simulation|bound",
       [](auto& c, auto& k, auto& v) {
         c.opt_use_bound = to_enum<bool>(k, v, {{"simulation", false}, {"bound", true}});
       }},
  };
  return t;
}

} // namespace

double ExperimentConfig::lambda() const { return d2d_load / (kPi * cell_radius * cell_radius); }

LinkBudget ExperimentConfig::base_budget() const {
  LinkBudget b;
  b.P_c = db_to_linear(pc_dbm) * pc_scale;
  b.P_d = db_to_linear(pd_dbm);
  b.alpha_c = alpha_c;
  b.alpha_d = alpha_d;
  b.C_c0_db = c_c0_db;
  b.C_d0_db = c_d0_db;
  const double band_db = 10.0 * std::log10(bandwidth_hz);
  b.N0_bs = db_to_linear(noise_psd_dbm_hz + band_db + nf_bs_db);
  b.N0_ue = db_to_linear(noise_psd_dbm_hz + band_db + nf_ue_db);
  b.sigma_db = sigma_db;
  b.T_c = T_c;
  return b;
}

LinkBudget ExperimentConfig::effective_budget() const {
  LinkBudget b = base_budget();
  const auto m = static_cast<double>(bs.antennas);
  if (scaling == PowerScaling::inverse_m) b.P_c /= m;
  if (scaling == PowerScaling::inverse_sqrt_m) b.P_c /= std::sqrt(m);
  return b;
}

AnalyticKind ExperimentConfig::resolved_analytic() const {
  if (analytic != AnalyticKind::automatic) return analytic;
  if (target == SimTarget::d2d) return AnalyticKind::d2d_bound;
  switch (csi) {
    case CsiMode::estimated_active: return AnalyticKind::contaminated;
    case CsiMode::estimated_silenced: return AnalyticKind::silenced_limit;
    case CsiMode::perfect: break;
  }
  return AnalyticKind::cellular_bound;
}

void ExperimentConfig::validate() const {
  if (drops < 1 || fades < 1) throw ConfigError("run.drops and run.fades must be >= 1");
  if (sweep_values.empty()) throw ConfigError("sweep.values must not be empty");
  if (rings < 0) throw ConfigError("geometry.rings must be >= 0");
  if (!(cell_radius > 0.0)) throw ConfigError("geometry.cell_radius must be > 0");
  if (!(region_multiplier >= 1.0)) throw ConfigError("geometry.region_multiplier must be >= 1");
  if (ues_per_cell < 1) throw ConfigError("cellular.ues_per_cell must be >= 1");
  if (d2d_load < 0.0) throw ConfigError("d2d.load must be >= 0");
  if (d2d_distance <= 0.0) throw ConfigError("d2d.distance must be > 0");
  if (!(pc_scale > 0.0)) throw ConfigError("cellular.power_scale must be > 0");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("noise.bandwidth_hz must be > 0");
  base_budget().validate();
  if (bs.antennas < 1 || ue.antennas < 1) throw ConfigError("antenna counts must be >= 1");
  const bool estimated = csi != CsiMode::perfect;
  if (estimated && target != SimTarget::cellular)
    throw ConfigError("estimated CSI is modeled for cellular detection only");
  if (estimated && (bs.cancel_cellular != 0 || bs.cancel_d2d != 0 || md_rule != MdRule::fixed))
    throw ConfigError("estimated CSI uses the MRC receiver: set m_c = m_d = 0");
  const AnalyticKind kind = resolved_analytic();
  const bool needs_estimated = kind == AnalyticKind::contaminated || kind == AnalyticKind::silenced_limit;
  if (kind != AnalyticKind::none && needs_estimated != estimated)
    throw ConfigError(std::string("analytic.kind does not match csi.mode (") +
                      (estimated ? "estimated CSI supports contaminated or silenced-limit"
                                 : "contaminated and silenced-limit need estimated CSI") +
                      ")");
  if (!estimated && target == SimTarget::d2d && kind != AnalyticKind::none && kind != AnalyticKind::d2d_bound)
    throw ConfigError("D2D targets support analytic.kind = d2d-bound or none");
  if (estimated && static_cast<std::size_t>(T_c) < ues_per_cell + coordinated_d2d)
    throw ConfigError("csi.training_length must be >= K + csi.coordinated_d2d");
}

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "preset") {
    cfg = preset(value);
    return;
  }
  for (const KeySpec& spec : key_table()) {
    if (key == spec.key || (spec.alias && key == spec.alias)) {
      spec.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "' (run `d2dmimo keys` for the list)");
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config(ExperimentConfig& cfg, std::istream& in, const std::string& origin) {
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      apply_setting(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_config(cfg, in, path);
}

std::string describe_keys() {
  std::ostringstream os;
  os << "preset = <name>\n";
  for (const KeySpec& s : key_table()) {
    os << s.key;
    if (s.alias) os << " (" << s.alias << ")";
    os << "\n    " << s.help << "\n";
  }
  return os.str();
}

ExperimentConfig at_sweep_point(const ExperimentConfig& cfg, std::size_t index) {
  ExperimentConfig c = cfg;
  const double v = cfg.sweep_values.at(index);
  auto count = [&](const char* what) {
    if (v < 0.0 || v != std::floor(v))
      throw ConfigError(std::string("sweep value for ") + what + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  };
  switch (cfg.sweep_var) {
    case SweepVar::none: break;
    case SweepVar::M: c.bs.antennas = count("M"); break;
    case SweepVar::m_c: c.bs.cancel_cellular = count("m_c"); break;
    case SweepVar::m_d: c.bs.cancel_d2d = count("m_d"); break;
    case SweepVar::K: c.ues_per_cell = count("K"); break;
    case SweepVar::N: c.ue.antennas = count("N"); break;
    case SweepVar::n_d: c.ue.cancel_d2d = count("n_d"); break;
    case SweepVar::lambda: c.d2d_load = v; break;
    case SweepVar::D: c.d2d_distance = v; break;
    case SweepVar::pc_scale: c.pc_scale = v; break;
  }
  if (c.md_rule == MdRule::sqrt_m)
    c.bs.cancel_d2d = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(c.bs.antennas))));
  return c;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "fig7", "fig8", "props-suite"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "fig2") {
    c.sweep_var = SweepVar::M;
    c.sweep_values = {20, 40, 60, 100, 150, 200, 300};
    c.bs = {3, 2, 100};
    c.analytic = AnalyticKind::cellular_bound;
  } else if (name == "fig3") {
    c.target = SimTarget::d2d;
    c.sweep_var = SweepVar::N;
    c.sweep_values = {4, 6, 8, 10, 12};
    c.ue = {0, 2, 4};
    c.d2d_distance = 20.0;
    c.analytic = AnalyticKind::d2d_bound;
  } else if (name == "fig4") {
    c.sweep_var = SweepVar::M;
    c.sweep_values = {16, 32, 64, 128, 256, 512, 1024};
    c.scaling = PowerScaling::inverse_m;
    c.pd_dbm = 3.0;  // D2D power lowered tenfold so the large-M limit is reached sooner
    c.bs = {0, 2, 100};
    c.analytic = AnalyticKind::cellular_bound;
  } else if (name == "fig5") {
    c.target = SimTarget::d2d;
    c.sweep_var = SweepVar::K;
    c.sweep_values = {1, 2, 5, 10, 15, 20};
    c.ue = {0, 0, 4};
    c.analytic = AnalyticKind::none;
  } else if (name == "fig7") {
    c.csi = CsiMode::estimated_active;
    c.T_c = 4;
    c.bs = {0, 0, 1024};
    c.sweep_var = SweepVar::lambda;
    c.sweep_values = {0, 2, 4, 8, 12, 16, 22, 30};
    c.analytic = AnalyticKind::contaminated;
    c.drops = 40;
    c.fades = 1;
    c.region_multiplier = 1.5;
  } else if (name == "fig8") {
    c.sweep_var = SweepVar::m_d;
    c.sweep_values = {0, 1, 2, 3, 4, 6, 8};
    c.bs = {3, 2, 100};
    c.analytic = AnalyticKind::cellular_bound;
  } else if (name == "props-suite") {
    c.sweep_var = SweepVar::M;
    c.sweep_values = {16, 64, 256, 1024};
    c.scaling = PowerScaling::inverse_m;
    c.bs = {0, 2, 100};
    c.analytic = AnalyticKind::scaled_limit_mc;
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (valid: " + names + ")");
  }
  return c;
}

} // namespace d2dmimo
