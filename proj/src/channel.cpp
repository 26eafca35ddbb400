// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace d2dmimo {
namespace {

constexpr double kLn10Over10 = 0.23025850929940456840;

double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

void sort_by_distance(std::vector<Interferer>& v) {
  std::sort(v.begin(), v.end(), [](const Interferer& a, const Interferer& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
}

} // namespace

LinkBudget LinkBudget::defaults() {
  LinkBudget b;
  b.P_c = dbm_to_mw(23.0);
  b.P_d = dbm_to_mw(13.0);
  b.N0_bs = noise_power(10e6, 6.0);
  b.N0_ue = noise_power(10e6, 9.0);
  return b;
}

double LinkBudget::noise_power(double bandwidth_hz, double noise_figure_db) {
  return dbm_to_mw(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

void LinkBudget::validate() const {
  if (!(alpha_c > 2.0) || !(alpha_d > 2.0))
    throw ConfigError("pathloss exponents must exceed 2 (alpha_c=" + std::to_string(alpha_c) +
                      ", alpha_d=" + std::to_string(alpha_d) + ")");
  if (!(P_c > 0.0) || !(P_d > 0.0) || !(N0_bs > 0.0) || !(N0_ue > 0.0))
    throw ConfigError("transmit and noise powers must be positive");
  if (sigma_db < 0.0) throw ConfigError("shadowing deviation must be >= 0");
  if (T_c < 1) throw ConfigError("training length must be >= 1");
}

double LinkBudget::shadow_mean() const { return lognormal_mean(sigma_db); }

double pathloss_gain(double dist, double alpha, double c0_db) {
  if (!(dist > 0.0)) throw DomainError("pathloss_gain: distance must be > 0");
  return std::exp(-kLn10Over10 * c0_db - alpha * std::log(dist));
}

double sample_shadowing(double sigma_db, Stream& rng) {
  if (sigma_db < 0.0) throw DomainError("sample_shadowing: sigma must be >= 0");
  if (sigma_db == 0.0) return 1.0;
  return db_to_linear(sigma_db * rng.normal());
}

double lognormal_mean(double sigma_db) { return lognormal_moment(sigma_db, 1.0); }

double lognormal_moment(double sigma_db, double p) {
  const double s = p * sigma_db * kLn10Over10;
  return std::exp(0.5 * s * s);
}

double snr_linear(double power, double shadow, double dist, double alpha, double c0_db, double n0) {
  return power * shadow * pathloss_gain(dist, alpha, c0_db) / n0;
}

LinkGains link_gains(const NetworkDrop& drop, Target target, const LinkBudget& budget) {
  LinkGains g;
  g.target = target;
  const bool at_bs = target.is_cellular();
  const RxKind rx_kind = at_bs ? RxKind::base_station : RxKind::d2d;
  // The central BS is one receiver for every UE in cell 0; shadowing into it
  // is keyed by BS index 0.
  const std::size_t rx_index = at_bs ? 0 : target.index;
  const double alpha = at_bs ? budget.alpha_c : budget.alpha_d;
  const double c0 = at_bs ? budget.C_c0_db : budget.C_d0_db;
  g.noise = at_bs ? budget.N0_bs : budget.N0_ue;

  if (at_bs) {
    if (target.index >= drop.ues_per_cell) throw DomainError("link_gains: cellular target outside cell 0");
    g.receiver = drop.layout.center(0);
  } else {
    if (target.index >= drop.num_d2d()) throw DomainError("link_gains: D2D target out of range");
    g.receiver = drop.d2d_rx[target.index];
  }

  auto coeff = [&](double power, TxKind kind, std::size_t tx, const Point& pos, double& dist) {
    dist = (pos - g.receiver).norm();
    return power * drop.shadowing.gain(kind, tx, rx_kind, rx_index) * pathloss_gain(dist, alpha, c0);
  };

  if (at_bs) {
    g.desired_coeff = coeff(budget.P_c, TxKind::cellular, target.index, drop.cellular[target.index],
                            g.desired_distance);
  } else {
    g.desired_coeff = coeff(budget.P_d, TxKind::d2d, target.index, drop.d2d_tx[target.index],
                            g.desired_distance);
  }

  g.cellular.reserve(drop.num_cellular());
  for (std::size_t u = 0; u < drop.num_cellular(); ++u) {
    if (at_bs && u == target.index) continue;
    Interferer in{u, 0.0, 0.0};
    in.coeff = coeff(budget.P_c, TxKind::cellular, u, drop.cellular[u], in.distance);
    g.cellular.push_back(in);
  }
  g.d2d.reserve(drop.num_d2d());
  for (std::size_t i = 0; i < drop.num_d2d(); ++i) {
    if (!at_bs && i == target.index) continue;
    Interferer in{i, 0.0, 0.0};
    in.coeff = coeff(budget.P_d, TxKind::d2d, i, drop.d2d_tx[i], in.distance);
    g.d2d.push_back(in);
  }
  sort_by_distance(g.cellular);
  sort_by_distance(g.d2d);
  return g;
}

} // namespace d2dmimo
