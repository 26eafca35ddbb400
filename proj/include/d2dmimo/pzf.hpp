// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "d2dmimo/channel.hpp"
#include "d2dmimo/core.hpp"
#include "d2dmimo/rng.hpp"

namespace d2dmimo {

struct PzfParams {
  std::size_t cancel_cellular = 0;  // m_c or n_c
  std::size_t cancel_d2d = 0;       // m_d or n_d
  std::size_t antennas = 1;         // M or N

  std::size_t canceled() const { return cancel_cellular + cancel_d2d; }
};

/// Z_c: m_c <= (B+1)K - 1 and m_c + m_d <= M - 1.
bool feasible_at_bs(const PzfParams& p, std::size_t total_cellular);
/// Z_d: n_c <= (B+1)K and n_c + n_d <= N - 1.
bool feasible_at_ue(const PzfParams& p, std::size_t total_cellular);
void require_feasible(const PzfParams& p, std::size_t total_cellular, bool at_bs);

/// Unit-norm projection of `desired` onto the orthogonal complement of the
/// columns of `canceled`. An empty `canceled` gives MRC.
template <typename DerivedH, typename DerivedC>
Eigen::Matrix<typename DerivedH::Scalar, Eigen::Dynamic, 1>
pzf_filter(const Eigen::MatrixBase<DerivedH>& desired, const Eigen::MatrixBase<DerivedC>& canceled) {
  using Scalar = typename DerivedH::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index dim = desired.size();
  const Eigen::Index n = canceled.cols();
  if (n > 0 && canceled.rows() != dim) throw DomainError("pzf_filter: dimension mismatch");
  if (n >= dim) throw InfeasibleError("pzf_filter: cannot cancel " + std::to_string(n) +
                                      " vectors with " + std::to_string(dim) + " antennas");
  Vec w = desired;
  if (n > 0) {
    Eigen::ColPivHouseholderQR<Mat> qr(canceled);
    qr.setThreshold(Real(1e-10));
    if (qr.rank() < n) throw NumericalError("pzf_filter: canceled channel vectors are rank deficient");
    const Mat q = qr.householderQ() * Mat::Identity(dim, n);
    // Two passes restore orthogonality lost to cancellation when the desired
    // vector is nearly inside the canceled span.
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= q * (q.adjoint() * w);
  }
  const Real norm = w.norm();
  if (!(norm > Real(0))) throw NumericalError("pzf_filter: projected desired vector vanished");
  return w / norm;
}

template <typename DerivedH>
Eigen::Matrix<typename DerivedH::Scalar, Eigen::Dynamic, 1>
pzf_filter(const Eigen::MatrixBase<DerivedH>& desired) {
  using Mat = Eigen::Matrix<typename DerivedH::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return pzf_filter(desired, Mat(desired.size(), 0));
}

struct CancellationSet {
  std::vector<std::size_t> cellular;  // positions into LinkGains::cellular
  std::vector<std::size_t> d2d;
};

/// The m_c nearest cellular and m_d nearest D2D interferers of the receiver,
/// truncated when fewer exist.
CancellationSet select_cancellation_targets(const LinkGains& gains, const PzfParams& params);

struct SinrBreakdown {
  double signal = 0.0;
  double cellular_interf = 0.0;
  double d2d_interf = 0.0;
  double noise = 0.0;
  double sinr = 0.0;

  double interference() const { return cellular_interf + d2d_interf; }
};

SinrBreakdown make_breakdown(double signal, double cellular, double d2d, double noise);

/// Post-processing SINR with unit-norm w. The first m_c cellular and m_d D2D
/// columns are the canceled ones and are left out of the sums.
template <typename Scalar>
SinrBreakdown evaluate_sinr(const ChannelSet<Scalar>& ch, const CVector<Scalar>& w, const PzfParams& p) {
  const double wn2 = static_cast<double>(w.squaredNorm());
  const double signal = ch.desired_coeff * static_cast<double>(std::norm(w.dot(ch.desired)));
  auto tail = [&](const CMatrix<Scalar>& h, const Eigen::VectorXd& coeff, std::size_t skip) {
    const Eigen::Index start = std::min<Eigen::Index>(static_cast<Eigen::Index>(skip), h.cols());
    const Eigen::Index count = h.cols() - start;
    if (count == 0) return 0.0;
    const CVector<Scalar> proj = h.rightCols(count).adjoint() * w;
    return (coeff.tail(count).array() * proj.cwiseAbs2().template cast<double>().array()).sum();
  };
  return make_breakdown(signal, tail(ch.cellular, ch.cellular_coeff, p.cancel_cellular),
                        tail(ch.d2d, ch.d2d_coeff, p.cancel_d2d), ch.noise_power * wn2);
}

template <typename Scalar>
SinrBreakdown sinr_cellular(const ChannelSet<Scalar>& ch, const CVector<Scalar>& w, const PzfParams& p) {
  return evaluate_sinr(ch, w, p);
}

template <typename Scalar>
SinrBreakdown sinr_d2d(const ChannelSet<Scalar>& ch, const CVector<Scalar>& w, const PzfParams& p) {
  return evaluate_sinr(ch, w, p);
}

/// Builds the PZF filter from a full channel realization and evaluates it.
template <typename Scalar = double>
SinrBreakdown sample_full_sinr(const LinkGains& gains, const PzfParams& p, Stream& rng) {
  const auto dim = static_cast<Eigen::Index>(p.antennas);
  const ChannelSet<Scalar> ch = assemble_channel_set<Scalar>(gains, dim, rng);
  const auto mc = std::min<Eigen::Index>(static_cast<Eigen::Index>(p.cancel_cellular), ch.cellular.cols());
  const auto md = std::min<Eigen::Index>(static_cast<Eigen::Index>(p.cancel_d2d), ch.d2d.cols());
  CMatrix<Scalar> canceled(dim, mc + md);
  canceled << ch.cellular.leftCols(mc), ch.d2d.leftCols(md);
  const CVector<Scalar> w = pzf_filter(ch.desired, canceled);
  return evaluate_sinr(ch, w, p);
}

/// Same law as sample_full_sinr without materializing vectors: with w built
/// from the desired and canceled channels only, |w*h|^2 is Gamma(dim - m) for
/// the desired link and i.i.d. Exp(1) for every uncanceled interferer.
SinrBreakdown sample_projected_sinr(const LinkGains& gains, const PzfParams& p, Stream& rng);

enum class FadingMode { projected, full };

SinrBreakdown sample_sinr(const LinkGains& gains, const PzfParams& p, FadingMode mode, Stream& rng);

struct SeEstimate {
  double mean = 0.0;        // bits/s/Hz
  double std_error = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t samples = 0;
};

/// Compensated running sum (Neumaier).
class KahanSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double se_bits(double sinr) { return std::log2(1.0 + sinr); }

/// Mean of log2(1 + SINR) with a normal-approximation 95% interval.
SeEstimate spectral_efficiency(std::span<const double> sinr_samples);

} // namespace d2dmimo
