// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "d2dmimo/channel.hpp"
#include "d2dmimo/core.hpp"
#include "d2dmimo/netgeom.hpp"
#include "d2dmimo/pzf.hpp"
#include "d2dmimo/rng.hpp"

namespace d2dmimo {

/// Q with orthonormal columns; the transmitted pilot matrix is sqrt(T_c) Q.
struct PilotBook {
  CMatrixXd Q;
  int T_c = 0;

  std::size_t size() const { return static_cast<std::size_t>(Q.cols()); }
  CVectorXd column(std::size_t i) const { return Q.col(static_cast<Eigen::Index>(i)); }
};

/// First n_seq columns of the unitary T_c-point DFT.
PilotBook make_pilots(int T_c, std::size_t n_seq);

enum class TrainingMode {
  active,    // uncoordinated D2D transmitters send data during training
  silenced,  // uncoordinated D2D transmitters stay quiet during training
};

/// Per-cell coordination: BS b trains its K UEs on pilots 0..K-1 and the
/// min(m_d, |Phi_b|) D2D transmitters of its cell nearest to it on K, K+1, ...
struct TrainingPlan {
  std::size_t ues_per_cell = 0;
  std::size_t m_d = 0;
  std::vector<std::vector<std::size_t>> coordinated;  // per cell, nearest first
  std::vector<int> slot;                              // per D2D tx, -1 if uncoordinated

  std::size_t pilots_needed() const { return ues_per_cell + m_d; }
};

TrainingPlan make_training_plan(const NetworkDrop& drop, std::size_t m_d);

/// Xi * pathloss from every transmitter to the central BS (no transmit power).
struct BsLargeScale {
  Eigen::VectorXd cellular;
  Eigen::VectorXd d2d;
};

BsLargeScale central_bs_large_scale(const NetworkDrop& drop, const LinkBudget& b);

/// Small-scale fading from every transmitter to the central BS.
struct BsChannels {
  CMatrixXd cellular;  // M x (B+1)K
  CMatrixXd d2d;       // M x |Phi|
};

BsChannels sample_bs_channels(const BsLargeScale& ls, Eigen::Index M, Stream& rng);

/// M x T_c training-phase signal at the central BS. Coordinated transmitters
/// send pilots at power P_c; uncoordinated D2D transmitters send i.i.d.
/// CN(0,1) symbols at P_d in active mode and nothing in silenced mode.
CMatrixXd training_rx(const BsChannels& h, const BsLargeScale& ls, const LinkBudget& b,
                      const PilotBook& pilots, const TrainingPlan& plan, TrainingMode mode, Stream& rng);

struct LinkStatistics {
  double own_gain = 0.0;           // Xi * pathloss of the link being estimated
  double beta_sum = 0.0;           // pilot-sharing gains relative to own_gain
  double d2d_interference = 0.0;   // sum of P_d Xi pathloss over uncoordinated D2D
  double N0 = 0.0;
  int T_c = 0;
  double P_c = 0.0;

  double xi() const;
  /// sqrt(T_c P_c own_gain), the normalization applied to Y q.
  double scale() const;
};

LinkStatistics cellular_link_statistics(const NetworkDrop& drop, const BsLargeScale& ls,
                                        const TrainingPlan& plan, const LinkBudget& b, std::size_t k,
                                        TrainingMode mode);

struct MmseEstimate {
  CVectorXd h_hat;
  double xi = 0.0;
  double err_cov_scalar = 0.0;  // 1 - xi
};

/// h_hat = xi * Y q / scale.
MmseEstimate mmse_estimate(const CMatrixXd& Y, const CVectorXd& q, const LinkStatistics& stats);

/// Large-M terms of the contaminated SINR for UE k of cell 0 under MRC with
/// every D2D transmitter uncoordinated and active during training.
struct ContaminatedTerms {
  double S_hat = 0.0;
  double I_cc = 0.0;
  double I_dc = 0.0;

  double sinr() const { return S_hat / (I_cc + I_dc); }
};

ContaminatedTerms contaminated_sinr_terms(const NetworkDrop& drop, const LinkBudget& b, std::size_t k);

/// T_c SNR^2 / (sum_b T_c SNR_b^2 + sum_i (P_d/N0) Xi_i l_i + 1) with the
/// unscaled P_c in `b`; the limit when training runs without D2D and the
/// cellular power is P_c / sqrt(M).
double deactivated_training_sinr(const NetworkDrop& drop, const LinkBudget& b, std::size_t k);

/// One training + data realization at the central BS with M antennas and MRC
/// on the MMSE estimates. Returns one breakdown per UE of cell 0.
std::vector<SinrBreakdown> sample_estimated_mrc(const NetworkDrop& drop, const BsLargeScale& ls,
                                                const LinkBudget& b, const PilotBook& pilots,
                                                const TrainingPlan& plan, TrainingMode mode,
                                                Eigen::Index M, Stream& rng);

} // namespace d2dmimo
