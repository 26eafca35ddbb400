// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/csi.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace d2dmimo {

PilotBook make_pilots(int T_c, std::size_t n_seq) {
  if (T_c < 1) throw InfeasibleError("make_pilots: T_c must be >= 1");
  if (static_cast<std::size_t>(T_c) < n_seq)
    throw InfeasibleError("make_pilots: T_c = " + std::to_string(T_c) + " cannot carry " +
                          std::to_string(n_seq) + " orthogonal pilots");
  PilotBook book;
  book.T_c = T_c;
  book.Q.resize(T_c, static_cast<Eigen::Index>(n_seq));
  const double norm = 1.0 / std::sqrt(static_cast<double>(T_c));
  for (Eigen::Index j = 0; j < book.Q.cols(); ++j)
    for (Eigen::Index t = 0; t < T_c; ++t) {
      // Reduce t*j mod T_c first so the phase stays exact for long sequences.
      const auto phase_index = static_cast<double>((t * j) % T_c);
      book.Q(t, j) = std::polar(norm, -2.0 * M_PI * phase_index / static_cast<double>(T_c));
    }
  return book;
}

TrainingPlan make_training_plan(const NetworkDrop& drop, std::size_t m_d) {
  TrainingPlan plan;
  plan.ues_per_cell = drop.ues_per_cell;
  plan.m_d = m_d;
  plan.slot.assign(drop.num_d2d(), -1);
  plan.coordinated.resize(drop.layout.num_cells());
  if (m_d == 0) return plan;
  const auto sets = partition_by_cell(drop.d2d_tx, drop.layout);
  for (std::size_t cell = 0; cell < drop.layout.num_cells(); ++cell) {
    std::vector<Point> members;
    for (std::size_t i : sets[cell]) members.push_back(drop.d2d_tx[i]);
    for (std::size_t pos : nearest_interferers(drop.layout.center(cell), members, m_d)) {
      const std::size_t tx = sets[cell][pos];
      plan.slot[tx] = static_cast<int>(plan.coordinated[cell].size());
      plan.coordinated[cell].push_back(tx);
    }
  }
  return plan;
}

BsLargeScale central_bs_large_scale(const NetworkDrop& drop, const LinkBudget& b) {
  BsLargeScale ls;
  const Point bs = drop.layout.center(0);
  ls.cellular.resize(static_cast<Eigen::Index>(drop.num_cellular()));
  ls.d2d.resize(static_cast<Eigen::Index>(drop.num_d2d()));
  for (std::size_t u = 0; u < drop.num_cellular(); ++u)
    ls.cellular[static_cast<Eigen::Index>(u)] =
        drop.shadowing.gain(TxKind::cellular, u, RxKind::base_station, 0) *
        pathloss_gain((drop.cellular[u] - bs).norm(), b.alpha_c, b.C_c0_db);
  for (std::size_t i = 0; i < drop.num_d2d(); ++i)
    ls.d2d[static_cast<Eigen::Index>(i)] = drop.shadowing.gain(TxKind::d2d, i, RxKind::base_station, 0) *
                                           pathloss_gain((drop.d2d_tx[i] - bs).norm(), b.alpha_c, b.C_c0_db);
  return ls;
}

BsChannels sample_bs_channels(const BsLargeScale& ls, Eigen::Index M, Stream& rng) {
  return {sample_fading<double>(M, ls.cellular.size(), rng), sample_fading<double>(M, ls.d2d.size(), rng)};
}

CMatrixXd training_rx(const BsChannels& h, const BsLargeScale& ls, const LinkBudget& b,
                      const PilotBook& pilots, const TrainingPlan& plan, TrainingMode mode, Stream& rng) {
  if (pilots.size() < plan.pilots_needed())
    throw InfeasibleError("training_rx: pilot book has " + std::to_string(pilots.size()) + " sequences, plan needs " +
                          std::to_string(plan.pilots_needed()));
  const Eigen::Index T = pilots.T_c;
  const Eigen::Index M = h.cellular.rows();
  const double tc_pc = static_cast<double>(T) * b.P_c;

  // Each transmitter contributes h_j a_j^* with a_j its T_c-long sequence.
  CMatrixXd a_cell(ls.cellular.size(), T);
  for (Eigen::Index u = 0; u < a_cell.rows(); ++u) {
    const auto k = static_cast<Eigen::Index>(static_cast<std::size_t>(u) % plan.ues_per_cell);
    a_cell.row(u) = std::sqrt(tc_pc * ls.cellular[u]) * pilots.Q.col(k).adjoint();
  }
  CMatrixXd a_d2d = CMatrixXd::Zero(ls.d2d.size(), T);
  for (Eigen::Index i = 0; i < a_d2d.rows(); ++i) {
    const int slot = plan.slot[static_cast<std::size_t>(i)];
    if (slot >= 0) {
      const auto col = static_cast<Eigen::Index>(plan.ues_per_cell) + slot;
      a_d2d.row(i) = std::sqrt(tc_pc * ls.d2d[i]) * pilots.Q.col(col).adjoint();
    } else if (mode == TrainingMode::active) {
      const double amp = std::sqrt(b.P_d * ls.d2d[i]);
      for (Eigen::Index t = 0; t < T; ++t) a_d2d(i, t) = amp * std::conj(rng.complex_normal());
    }
  }
  CMatrixXd Y = sample_fading<double>(M, T, rng) * std::sqrt(b.N0_bs);
  if (a_cell.rows() > 0) Y.noalias() += h.cellular * a_cell;
  if (a_d2d.rows() > 0) Y.noalias() += h.d2d * a_d2d;
  return Y;
}

double LinkStatistics::xi() const {
  return 1.0 / (1.0 + beta_sum + (d2d_interference + N0) / (static_cast<double>(T_c) * P_c * own_gain));
}

double LinkStatistics::scale() const { return std::sqrt(static_cast<double>(T_c) * P_c * own_gain); }

LinkStatistics cellular_link_statistics(const NetworkDrop& drop, const BsLargeScale& ls,
                                        const TrainingPlan& plan, const LinkBudget& b, std::size_t k,
                                        TrainingMode mode) {
  if (k >= drop.ues_per_cell) throw DomainError("cellular_link_statistics: UE outside cell 0");
  LinkStatistics s;
  s.own_gain = ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(0, k))];
  if (!(s.own_gain > 0.0)) throw DomainError("cellular_link_statistics: own-link gain must be > 0");
  KahanSum beta;
  for (std::size_t cell = 1; cell < drop.layout.num_cells(); ++cell)
    beta.add(ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(cell, k))] / s.own_gain);
  s.beta_sum = beta.value();
  if (mode == TrainingMode::active) {
    KahanSum d;
    for (Eigen::Index i = 0; i < ls.d2d.size(); ++i)
      if (plan.slot[static_cast<std::size_t>(i)] < 0) d.add(b.P_d * ls.d2d[i]);
    s.d2d_interference = d.value();
  }
  s.N0 = b.N0_bs;
  s.T_c = b.T_c;
  s.P_c = b.P_c;
  return s;
}

MmseEstimate mmse_estimate(const CMatrixXd& Y, const CVectorXd& q, const LinkStatistics& stats) {
  if (!(stats.own_gain > 0.0)) throw DomainError("mmse_estimate: own-link gain must be > 0");
  MmseEstimate e;
  e.xi = stats.xi();
  e.err_cov_scalar = 1.0 - e.xi;
  e.h_hat = (e.xi / stats.scale()) * (Y * q);
  return e;
}

ContaminatedTerms contaminated_sinr_terms(const NetworkDrop& drop, const LinkBudget& b, std::size_t k) {
  const BsLargeScale ls = central_bs_large_scale(drop, b);
  const double tc = static_cast<double>(b.T_c);
  ContaminatedTerms t;
  const double own = b.P_c * ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(0, k))];
  t.S_hat = tc * own * own;
  KahanSum cc, dc;
  for (std::size_t cell = 1; cell < drop.layout.num_cells(); ++cell) {
    const double a = b.P_c * ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(cell, k))];
    cc.add(tc * a * a);
  }
  for (Eigen::Index i = 0; i < ls.d2d.size(); ++i) {
    const double a = b.P_d * ls.d2d[i];
    dc.add(a * a);
  }
  t.I_cc = cc.value();
  t.I_dc = dc.value();
  return t;
}

double deactivated_training_sinr(const NetworkDrop& drop, const LinkBudget& b, std::size_t k) {
  const BsLargeScale ls = central_bs_large_scale(drop, b);
  const double tc = static_cast<double>(b.T_c);
  const double snr0 = b.P_c * ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(0, k))] / b.N0_bs;
  KahanSum den;
  for (std::size_t cell = 1; cell < drop.layout.num_cells(); ++cell) {
    const double snr = b.P_c * ls.cellular[static_cast<Eigen::Index>(drop.cellular_index(cell, k))] / b.N0_bs;
    den.add(tc * snr * snr);
  }
  for (Eigen::Index i = 0; i < ls.d2d.size(); ++i) den.add(b.P_d * ls.d2d[i] / b.N0_bs);
  return tc * snr0 * snr0 / (den.value() + 1.0);
}

std::vector<SinrBreakdown> sample_estimated_mrc(const NetworkDrop& drop, const BsLargeScale& ls,
                                                const LinkBudget& b, const PilotBook& pilots,
                                                const TrainingPlan& plan, TrainingMode mode,
                                                Eigen::Index M, Stream& rng) {
  const BsChannels h = sample_bs_channels(ls, M, rng);
  const CMatrixXd Y = training_rx(h, ls, b, pilots, plan, mode, rng);
  const Eigen::VectorXd cell_power = b.P_c * ls.cellular;
  const Eigen::VectorXd d2d_power = b.P_d * ls.d2d;

  std::vector<SinrBreakdown> out;
  out.reserve(drop.ues_per_cell);
  for (std::size_t k = 0; k < drop.ues_per_cell; ++k) {
    const LinkStatistics stats = cellular_link_statistics(drop, ls, plan, b, k, mode);
    const CVectorXd w = mmse_estimate(Y, pilots.column(k), stats).h_hat;
    const auto own = static_cast<Eigen::Index>(drop.cellular_index(0, k));
    const Eigen::VectorXd gc = (h.cellular.adjoint() * w).cwiseAbs2();
    double cellular = 0.0;
    for (Eigen::Index u = 0; u < gc.size(); ++u)
      if (u != own) cellular += cell_power[u] * gc[u];
    double d2d = 0.0;
    if (d2d_power.size() > 0) d2d = d2d_power.dot((h.d2d.adjoint() * w).cwiseAbs2());
    out.push_back(make_breakdown(cell_power[own] * gc[own], cellular, d2d, b.N0_bs * w.squaredNorm()));
  }
  return out;
}

} // namespace d2dmimo
