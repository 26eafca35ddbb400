// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/analytic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace d2dmimo {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLn10Over10 = 0.23025850929940456840;
constexpr double kInf = std::numeric_limits<double>::infinity();

double check_rho_domain(double alpha) {
  if (!(alpha > 2.0)) throw DomainError("rho: alpha must exceed 2");
  return alpha;
}

// ln E[exp(-e^u Xi^2)] and ln(1 - E[exp(-e^u Xi^2)]) for lognormal Xi, tabulated
// on a uniform grid in u and read back with 4-point Lagrange interpolation.
// The transition of exp(-e^u Xi^2) over the Gaussian exponent is sharp, so the
// table is built once per sigma with a fine composite Gauss-Legendre rule.
class LognormalLaplaceTable {
public:
  static constexpr double kLo = -90.0;
  static constexpr double kHi = 120.0;
  static constexpr double kStep = 0.02;

  explicit LognormalLaplaceTable(double sigma_db) : s2_(2.0 * sigma_db * kLn10Over10) {
    const auto n = static_cast<std::size_t>((kHi - kLo) / kStep) + 1;
    log_l_.resize(n);
    log_one_minus_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = kLo + kStep * static_cast<double>(i);
      const auto [l, one_minus] = direct(u);
      log_l_[i] = l > 0.0 ? std::log(l) : -1e300;
      log_one_minus_[i] = one_minus > 0.0 ? std::log(one_minus) : -1e300;
    }
    second_moment_ = std::exp(0.5 * s2_ * s2_);
  }

  /// Returns {L, 1 - L} at y = e^u.
  std::pair<double, double> eval(double u) const {
    if (u < kLo + 2 * kStep) {
      // 1 - L ~ y E[Xi^2] far below the transition.
      const double one_minus = std::exp(u) * second_moment_;
      return {1.0 - one_minus, one_minus};
    }
    if (u > kHi - 2 * kStep) return {0.0, 1.0};
    return {std::exp(interp(log_l_, u)), std::exp(interp(log_one_minus_, u))};
  }

private:
  // Direct evaluation: integral of phi(x) exp(-e^{u + s2 x}) over x.
  std::pair<double, double> direct(double u) const {
    static constexpr std::array<double, 5> x5 = {-0.906179845938663992797627, -0.538469310105683091036314,
                                                 0.0, 0.538469310105683091036314, 0.906179845938663992797627};
    static constexpr std::array<double, 5> w5 = {0.236926885056189087514264, 0.478628670499366468041292,
                                                 0.568888888888888888888889, 0.478628670499366468041292,
                                                 0.236926885056189087514264};
    constexpr double lo = -10.0, hi = 10.0, panel = 0.05;
    const int panels = static_cast<int>((hi - lo) / panel);
    double l = 0.0, one_minus = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + panel * (p + 0.5);
      for (int j = 0; j < 5; ++j) {
        const double x = c + 0.5 * panel * x5[j];
        const double phi = std::exp(-0.5 * x * x) * 0.39894228040143267794;
        const double y = std::exp(u + s2_ * x);
        const double w = 0.5 * panel * w5[j] * phi;
        l += w * std::exp(-y);
        one_minus += w * -std::expm1(-y);
      }
    }
    return {l, one_minus};
  }

  static double interp(const std::vector<double>& t, double u) {
    const double pos = (u - kLo) / kStep;
    auto i = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(t.size()) - 4);
    const double x = pos - static_cast<double>(i);  // in [1, 2) for interior points
    const double y0 = t[i], y1 = t[i + 1], y2 = t[i + 2], y3 = t[i + 3];
    if (y0 < -1e299 || y1 < -1e299 || y2 < -1e299 || y3 < -1e299) return -1e300;
    return y0 * (x - 1) * (x - 2) * (x - 3) / -6.0 + y1 * x * (x - 2) * (x - 3) / 2.0 +
           y2 * x * (x - 1) * (x - 3) / -2.0 + y3 * x * (x - 1) * (x - 2) / 6.0;
  }

  double s2_;
  double second_moment_ = 1.0;
  std::vector<double> log_l_;
  std::vector<double> log_one_minus_;
};

const LognormalLaplaceTable& laplace_table(double sigma_db) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<LognormalLaplaceTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[sigma_db];
  if (!slot) slot = std::make_unique<LognormalLaplaceTable>(sigma_db);
  return *slot;
}

std::pair<double, double> square_laplace(double u, double sigma_db) {
  if (sigma_db == 0.0) {
    const double y = std::exp(u);
    return {std::exp(-y), -std::expm1(-y)};
  }
  return laplace_table(sigma_db).eval(u);
}

} // namespace

double rho(const RhoParams& p) {
  check_rho_domain(p.alpha);
  const double half = 0.5 * p.alpha;
  const double m = static_cast<double>(p.m);
  // No interferers at all: nothing is left to average, whatever m is.
  if (p.lambda == 0.0 || p.P_d == 0.0) return 0.0;
  if (p.m == 0 || m + 1.0 <= half) return kInf;
  const double log_rho = std::log(2.0) + half * std::log(kPi * p.lambda) + std::log(p.P_d) +
                         std::log(p.shadow_mean) + std::lgamma(m + 1.0 - half) - std::log(p.alpha - 2.0) -
                         std::log(p.N0) - std::lgamma(m);
  return std::exp(log_rho);
}

RhoParams rho_params_at_bs(const LinkBudget& b, double lambda, std::size_t m) {
  return {m, b.alpha_c, lambda, b.P_d * db_to_linear(-b.C_c0_db), b.shadow_mean(), b.N0_bs};
}

RhoParams rho_params_at_ue(const LinkBudget& b, double lambda, std::size_t m) {
  return {m, b.alpha_d, lambda, b.P_d * db_to_linear(-b.C_d0_db), b.shadow_mean(), b.N0_ue};
}

GammaRatio stirling_gamma_ratio(double m, double alpha) {
  if (!(m >= 1.0) || !(m + 1.0 > 0.5 * alpha))
    throw DomainError("stirling_gamma_ratio: need m >= 1 and m + 1 > alpha/2");
  GammaRatio r;
  r.exact = std::exp(std::lgamma(m + 1.0 - 0.5 * alpha) - std::lgamma(m));
  r.asymptote = std::pow(m - 0.5 * alpha, 1.0 - 0.5 * alpha);
  r.relative_gap = std::abs(r.exact - r.asymptote) / r.exact;
  return r;
}

namespace {

double jensen_bound(const LinkGains& gains, const PzfParams& p, double rho_value) {
  if (p.antennas < p.canceled() + 1)
    throw InfeasibleError("SE lower bound needs antennas >= m_c + m_d + 1");
  if (std::isinf(rho_value)) return 0.0;
  KahanSum interf;
  for (std::size_t i = p.cancel_cellular; i < gains.cellular.size(); ++i) interf.add(gains.cellular[i].coeff);
  const double dof = static_cast<double>(p.antennas - p.canceled() - 1);
  const double num = dof * gains.desired_coeff / gains.noise;
  return std::log2(1.0 + num / (interf.value() / gains.noise + rho_value + 1.0));
}

} // namespace

double cellular_se_lower_bound(const LinkGains& gains, const PzfParams& p, const LinkBudget& b,
                               double lambda) {
  if (!gains.target.is_cellular()) throw DomainError("cellular_se_lower_bound: target is a D2D pair");
  return jensen_bound(gains, p, rho(rho_params_at_bs(b, lambda, p.cancel_d2d)));
}

double d2d_se_lower_bound(const LinkGains& gains, const PzfParams& p, const LinkBudget& b, double lambda) {
  if (gains.target.is_cellular()) throw DomainError("d2d_se_lower_bound: target is cellular");
  return jensen_bound(gains, p, rho(rho_params_at_ue(b, lambda, p.cancel_d2d)));
}

double asymptotic_se_bound(double snr, double rho_value) {
  if (std::isinf(rho_value)) return 0.0;
  return std::log2(1.0 + snr / (rho_value + 1.0));
}

double power_scaled_limit_sample(const LinkGains& gains, std::size_t m_d, Stream& rng) {
  KahanSum interf;
  for (std::size_t i = m_d; i < gains.d2d.size(); ++i) interf.add(gains.d2d[i].coeff * rng.exponential());
  return std::log2(1.0 + gains.desired_snr() / (interf.value() / gains.noise + 1.0));
}

ContaminationStats contamination_stats(const NetworkDrop& drop, std::size_t k, const LinkBudget& b,
                                       double lambda) {
  if (k >= drop.ues_per_cell) throw DomainError("contamination_stats: UE index outside cell 0");
  ContaminationStats s;
  const Point bs = drop.layout.center(0);
  auto scale = [&](std::size_t ue) {
    const double a = b.P_c * pathloss_gain((drop.cellular[ue] - bs).norm(), b.alpha_c, b.C_c0_db);
    return static_cast<double>(b.T_c) * a * a;
  };
  s.desired_scale = scale(drop.cellular_index(0, k));
  for (std::size_t cell = 1; cell < drop.layout.num_cells(); ++cell)
    s.pilot_scales.push_back(scale(drop.cellular_index(cell, k)));
  s.lambda = lambda;
  s.P_d = b.P_d * db_to_linear(-b.C_c0_db);
  s.alpha = b.alpha_c;
  s.sigma_db = b.sigma_db;
  return s;
}

double lognormal_square_laplace(double zc, double sigma_db) {
  if (zc < 0.0) throw DomainError("lognormal_square_laplace: argument must be >= 0");
  if (zc == 0.0) return 1.0;
  return square_laplace(std::log(zc), sigma_db).first;
}

double contaminated_se_integral(const ContaminationStats& s, const QuadratureOptions& opt) {
  if (!(s.alpha > 2.0)) throw DomainError("contaminated_se_integral: alpha must exceed 2");
  if (!(s.desired_scale > 0.0)) throw DomainError("contaminated_se_integral: desired scale must be > 0");
  const double s0 = s.desired_scale;
  std::vector<double> log_pilot;
  log_pilot.reserve(s.pilot_scales.size());
  for (double p : s.pilot_scales)
    if (p > 0.0) log_pilot.push_back(std::log(p / s0));
  const double floor = s.floor / s0;
  // Laplace functional of the D2D shot noise in the normalized variable z' = z s0.
  double c_d = 0.0;
  if (s.lambda > 0.0 && s.P_d > 0.0) {
    const double inv_a = 1.0 / s.alpha;
    c_d = kPi * s.lambda * std::tgamma(1.0 - inv_a) * std::pow(s.P_d, 2.0 * inv_a) *
          lognormal_moment(s.sigma_db, 2.0 * inv_a) * std::pow(s0, -inv_a);
  }
  if (log_pilot.empty() && c_d == 0.0 && floor == 0.0)
    throw NumericalError("contaminated_se_integral: no interference and no floor; the integral diverges");

  auto integrand = [&](double t) {
    const double one_minus = square_laplace(t, s.sigma_db).second;
    double log_rest = 0.0;
    for (double lp : log_pilot) {
      const double l = square_laplace(t + lp, s.sigma_db).first;
      if (l <= 0.0) return 0.0;
      log_rest += std::log(l);
    }
    log_rest -= c_d * std::exp(t / s.alpha) + floor * std::exp(t);
    return one_minus * std::exp(log_rest);
  };

  // Bracket the support: the integrand vanishes like e^t on the left and at
  // least like a Gaussian in t on the right.
  constexpr double t_min = -60.0, t_max = 400.0;
  double peak = 0.0;
  double last = t_min;
  for (double t = t_min; t <= t_max; t += 0.5) {
    const double v = integrand(t);
    peak = std::max(peak, v);
    if (v > 1e-18 * std::max(peak, 1e-300)) last = t;
  }
  if (last >= t_max - 1.0)
    throw NumericalError("contaminated_se_integral: integrand not decayed at the upper search limit");
  const QuadratureResult r = integrate(integrand, t_min, last + 1.0, opt);
  return r.value / kLn2;
}

} // namespace d2dmimo
