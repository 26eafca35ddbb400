// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "d2dmimo/core.hpp"
#include "d2dmimo/netgeom.hpp"
#include "d2dmimo/rng.hpp"

namespace d2dmimo {

/// Powers are linear (mW); references in dB at 1 m.
struct LinkBudget {
  double P_c = 0.0;
  double P_d = 0.0;
  double alpha_c = 3.76;
  double alpha_d = 4.37;
  double C_c0_db = 15.3;
  double C_d0_db = 38.5;
  double N0_bs = 0.0;  // noise over the band, BS noise figure
  double N0_ue = 0.0;  // same, UE noise figure
  double sigma_db = 7.0;
  int T_c = 4;

  /// Default system parameters: 23/13 dBm, 10 MHz at -174 dBm/Hz, NF 6/9 dB.
  static LinkBudget defaults();

  static double noise_power(double bandwidth_hz, double noise_figure_db);

  void validate() const;
  double shadow_mean() const;
};

/// 10^{-C0/10} d^{-alpha}.
double pathloss_gain(double dist, double alpha, double c0_db);

double sample_shadowing(double sigma_db, Stream& rng);
/// E[Xi] for Xi = 10^{X/10}, X ~ N(0, sigma_db^2).
double lognormal_mean(double sigma_db);
/// E[Xi^p] for the same law.
double lognormal_moment(double sigma_db, double p);

template <typename Scalar = double>
CVector<Scalar> sample_fading(Eigen::Index dim, Stream& rng) {
  if (dim < 1) throw DomainError("sample_fading: dim must be >= 1");
  CVector<Scalar> h(dim);
  for (Eigen::Index i = 0; i < dim; ++i) h[i] = std::complex<Scalar>(rng.complex_normal());
  return h;
}

template <typename Scalar = double>
CMatrix<Scalar> sample_fading(Eigen::Index rows, Eigen::Index cols, Stream& rng) {
  CMatrix<Scalar> h(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) h(i, j) = std::complex<Scalar>(rng.complex_normal());
  return h;
}

double snr_linear(double power, double shadow, double dist, double alpha, double c0_db, double n0);

/// Detection problem: cellular UE k of cell 0 at the central BS, or the
/// receiver of D2D pair r.
struct Target {
  enum class Kind { cellular, d2d };
  Kind kind = Kind::cellular;
  std::size_t index = 0;

  static Target cellular(std::size_t k) { return {Kind::cellular, k}; }
  static Target d2d(std::size_t r) { return {Kind::d2d, r}; }
  bool is_cellular() const { return kind == Kind::cellular; }
};

struct Interferer {
  std::size_t index = 0;  // cellular UE index (cell-major) or D2D pair index
  double distance = 0.0;
  double coeff = 0.0;     // P * Xi * pathloss at the receiver
};

/// Large-scale view of one detection problem. Interferer lists are sorted by
/// distance to the receiver (ties by index), so cancellation sets are prefixes.
struct LinkGains {
  Target target;
  Point receiver;
  double desired_distance = 0.0;
  double desired_coeff = 0.0;
  double noise = 0.0;
  std::vector<Interferer> cellular;
  std::vector<Interferer> d2d;

  double desired_snr() const { return desired_coeff / noise; }
};

/// Uses (alpha_c, C_c0, N0_bs) for links into the BS and (alpha_d, C_d0,
/// N0_ue) for links into a D2D receiver.
LinkGains link_gains(const NetworkDrop& drop, Target target, const LinkBudget& budget);

template <typename Scalar = double>
struct ChannelSet {
  CVector<Scalar> desired;
  double desired_coeff = 0.0;
  CMatrix<Scalar> cellular;  // one column per interferer, LinkGains order
  Eigen::VectorXd cellular_coeff;
  CMatrix<Scalar> d2d;
  Eigen::VectorXd d2d_coeff;
  double noise_power = 0.0;

  Eigen::Index dim() const { return desired.size(); }
};

template <typename Scalar = double>
ChannelSet<Scalar> assemble_channel_set(const LinkGains& gains, Eigen::Index dim, Stream& rng) {
  ChannelSet<Scalar> set;
  set.desired = sample_fading<Scalar>(dim, rng);
  set.desired_coeff = gains.desired_coeff;
  const auto nc = static_cast<Eigen::Index>(gains.cellular.size());
  const auto nd = static_cast<Eigen::Index>(gains.d2d.size());
  set.cellular = sample_fading<Scalar>(dim, nc, rng);
  set.d2d = sample_fading<Scalar>(dim, nd, rng);
  set.cellular_coeff.resize(nc);
  set.d2d_coeff.resize(nd);
  for (Eigen::Index i = 0; i < nc; ++i) set.cellular_coeff[i] = gains.cellular[i].coeff;
  for (Eigen::Index i = 0; i < nd; ++i) set.d2d_coeff[i] = gains.d2d[i].coeff;
  set.noise_power = gains.noise;
  return set;
}

template <typename Scalar = double>
ChannelSet<Scalar> assemble_channel_set(const NetworkDrop& drop, Target target,
                                        const LinkBudget& budget, Eigen::Index dim, Stream& rng) {
  return assemble_channel_set<Scalar>(link_gains(drop, target, budget), dim, rng);
}

} // namespace d2dmimo
