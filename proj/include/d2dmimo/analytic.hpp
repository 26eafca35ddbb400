// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "d2dmimo/channel.hpp"
#include "d2dmimo/pzf.hpp"
#include "d2dmimo/quadrature.hpp"
#include "d2dmimo/rng.hpp"

namespace d2dmimo {

/// Inputs of the mean residual shot noise after canceling the m nearest PPP
/// interferers. `P_d` is the transmit power with the pathloss reference
/// folded in (P_d * 10^{-C0/10}).
struct RhoParams {
  std::size_t m = 0;
  double alpha = 3.76;
  double lambda = 0.0;
  double P_d = 0.0;
  double shadow_mean = 1.0;
  double N0 = 1.0;
};

/// 2 (pi lambda)^{alpha/2} P_d Xi Gamma(m+1-alpha/2) / ((alpha-2) N0 Gamma(m)),
/// +infinity when m = 0 or m + 1 <= alpha/2.
double rho(const RhoParams& p);

/// RhoParams for D2D interference into the BS (alpha_c) or into a D2D
/// receiver (alpha_d), with the budget's references and noise.
RhoParams rho_params_at_bs(const LinkBudget& b, double lambda, std::size_t m);
RhoParams rho_params_at_ue(const LinkBudget& b, double lambda, std::size_t m);

struct GammaRatio {
  double exact = 0.0;       // Gamma(m+1-alpha/2) / Gamma(m)
  double asymptote = 0.0;   // (m - alpha/2)^{1-alpha/2}
  double relative_gap = 0.0;
};

GammaRatio stirling_gamma_ratio(double m, double alpha);

/// log2(1 + (M-m_c-m_d-1) SNR_0k / (sum of uncanceled SNR_bl + rho + 1)),
/// conditioned on the drop's cellular positions and shadowing. Returns 0 when
/// rho is infinite (the bound is vacuous there).
double cellular_se_lower_bound(const LinkGains& gains, const PzfParams& p, const LinkBudget& b,
                               double lambda);

/// D2D counterpart with rho(n_d, alpha_d) and the UE-side budget.
double d2d_se_lower_bound(const LinkGains& gains, const PzfParams& p, const LinkBudget& b,
                          double lambda);

/// log2(1 + SNR / (rho + 1)); 0 when rho is infinite.
double asymptotic_se_bound(double snr, double rho_value);

/// One Monte Carlo draw of the power-scaled limit: SNR_0k over the uncanceled
/// D2D shot noise with Exp(1) marks plus noise. `gains` must use the unscaled
/// cellular power. Returns log2(1 + .).
double power_scaled_limit_sample(const LinkGains& gains, std::size_t m_d, Stream& rng);

/// Large-scale inputs of the contaminated SE integral for one cellular UE.
/// Powers carry the pathloss reference; shadowing enters through the
/// lognormal law, so only deterministic factors appear here.
struct ContaminationStats {
  double desired_scale = 0.0;               // T_c (P_c l_0k)^2, S_hat = desired_scale * Xi^2
  std::vector<double> pilot_scales;         // T_c (P_c l_bk)^2 for each b >= 1
  double lambda = 0.0;
  double P_d = 0.0;                         // D2D power with reference folded in
  double alpha = 3.76;
  double sigma_db = 7.0;
  double floor = 0.0;                       // deterministic additive term in the denominator
};

ContaminationStats contamination_stats(const NetworkDrop& drop, std::size_t k, const LinkBudget& b,
                                       double lambda);

/// E[exp(-z c Xi^2)] for lognormal Xi with deviation sigma_db.
double lognormal_square_laplace(double zc, double sigma_db);

/// E[log2(1 + S_hat / (I_cc + I_dc + floor))] over shadowing and the PPP via
/// the Laplace-functional integral in t = ln z.
double contaminated_se_integral(const ContaminationStats& s, const QuadratureOptions& opt = {});

} // namespace d2dmimo
