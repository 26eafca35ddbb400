// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/pzf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace d2dmimo {

bool feasible_at_bs(const PzfParams& p, std::size_t total_cellular) {
  return total_cellular >= 1 && p.cancel_cellular <= total_cellular - 1 && p.antennas >= 1 &&
         p.canceled() <= p.antennas - 1;
}

bool feasible_at_ue(const PzfParams& p, std::size_t total_cellular) {
  return p.cancel_cellular <= total_cellular && p.antennas >= 1 && p.canceled() <= p.antennas - 1;
}

void require_feasible(const PzfParams& p, std::size_t total_cellular, bool at_bs) {
  const bool ok = at_bs ? feasible_at_bs(p, total_cellular) : feasible_at_ue(p, total_cellular);
  if (!ok)
    throw InfeasibleError(std::string("PZF parameters outside ") + (at_bs ? "Z_c" : "Z_d") + ": cancel (" +
                          std::to_string(p.cancel_cellular) + ", " + std::to_string(p.cancel_d2d) +
                          ") with " + std::to_string(p.antennas) + " antennas and " +
                          std::to_string(total_cellular) + " cellular UEs");
}

CancellationSet select_cancellation_targets(const LinkGains& gains, const PzfParams& params) {
  CancellationSet set;
  const std::size_t mc = std::min(params.cancel_cellular, gains.cellular.size());
  const std::size_t md = std::min(params.cancel_d2d, gains.d2d.size());
  for (std::size_t i = 0; i < mc; ++i) set.cellular.push_back(i);
  for (std::size_t i = 0; i < md; ++i) set.d2d.push_back(i);
  return set;
}

SinrBreakdown make_breakdown(double signal, double cellular, double d2d, double noise) {
  SinrBreakdown b{signal, cellular, d2d, noise, 0.0};
  const double den = cellular + d2d + noise;
  b.sinr = den > 0.0 ? signal / den : (signal > 0.0 ? INFINITY : 0.0);
  return b;
}

SinrBreakdown sample_projected_sinr(const LinkGains& gains, const PzfParams& p, Stream& rng) {
  const std::size_t mc = std::min(p.cancel_cellular, gains.cellular.size());
  const std::size_t md = std::min(p.cancel_d2d, gains.d2d.size());
  if (mc + md >= p.antennas)
    throw InfeasibleError("sample_projected_sinr: " + std::to_string(mc + md) + " cancellations with " +
                          std::to_string(p.antennas) + " antennas");
  const double signal = gains.desired_coeff * rng.gamma(static_cast<double>(p.antennas - mc - md));
  KahanSum ic, id;
  for (std::size_t i = mc; i < gains.cellular.size(); ++i) ic.add(gains.cellular[i].coeff * rng.exponential());
  for (std::size_t i = md; i < gains.d2d.size(); ++i) id.add(gains.d2d[i].coeff * rng.exponential());
  return make_breakdown(signal, ic.value(), id.value(), gains.noise);
}

SinrBreakdown sample_sinr(const LinkGains& gains, const PzfParams& p, FadingMode mode, Stream& rng) {
  return mode == FadingMode::projected ? sample_projected_sinr(gains, p, rng)
                                       : sample_full_sinr<double>(gains, p, rng);
}

SeEstimate spectral_efficiency(std::span<const double> sinr_samples) {
  if (sinr_samples.empty()) throw DomainError("spectral_efficiency: no samples");
  const std::size_t n = sinr_samples.size();
  KahanSum sum;
  for (double s : sinr_samples) {
    if (!(s >= 0.0)) throw DomainError("spectral_efficiency: SINR must be >= 0");
    sum.add(se_bits(s));
  }
  SeEstimate e;
  e.samples = n;
  e.mean = sum.value() / static_cast<double>(n);
  if (n > 1) {
    KahanSum ss;
    for (double s : sinr_samples) {
      const double d = se_bits(s) - e.mean;
      ss.add(d * d);
    }
    e.std_error = std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  e.ci_halfwidth = 1.959963984540054 * e.std_error;
  return e;
}

} // namespace d2dmimo
