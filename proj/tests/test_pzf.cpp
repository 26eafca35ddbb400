// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "d2dmimo/pzf.hpp"
#include "d2dmimo/quadrature.hpp"
#include "support/stats.hpp"

using namespace d2dmimo;

namespace {

LinkGains synthetic_gains(std::size_t nc, std::size_t nd, double coeff = 1.0) {
  LinkGains g;
  g.desired_coeff = 2.0;
  g.noise = 0.5;
  for (std::size_t i = 0; i < nc; ++i) g.cellular.push_back({i, 10.0 + static_cast<double>(i), coeff});
  for (std::size_t i = 0; i < nd; ++i) g.d2d.push_back({i, 5.0 + static_cast<double>(i), coeff});
  return g;
}

} // namespace

TEST_CASE("feasibility sets") {
  CHECK(feasible_at_bs({3, 2, 100}, 76));
  CHECK(feasible_at_bs({75, 0, 100}, 76));
  CHECK_FALSE(feasible_at_bs({76, 0, 100}, 76));
  CHECK(feasible_at_bs({3, 96, 100}, 76));
  CHECK_FALSE(feasible_at_bs({3, 97, 100}, 76));
  CHECK(feasible_at_ue({0, 3, 4}, 76));
  CHECK_FALSE(feasible_at_ue({0, 4, 4}, 76));
  CHECK(feasible_at_ue({76, 0, 100}, 76));
  CHECK_FALSE(feasible_at_ue({77, 0, 100}, 76));
  CHECK_THROWS_AS(require_feasible({3, 97, 100}, 76, true), InfeasibleError);
}

TEST_CASE("pzf filter") {
  Stream rng(31);
  SUBCASE("no cancellation is MRC") {
    const CVectorXd h = sample_fading<double>(12, rng);
    const CVectorXd w = pzf_filter(h);
    CHECK((w - h / h.norm()).norm() < 1e-14);
  }
  SUBCASE("hand-computed projection") {
    CVectorXd h = CVectorXd::Zero(4);
    h[0] = 1.0;
    h[1] = 1.0;
    CMatrixXd c = CMatrixXd::Zero(4, 1);
    c(0, 0) = 1.0;
    const CVectorXd w = pzf_filter(h, c);
    CVectorXd e2 = CVectorXd::Zero(4);
    e2[1] = 1.0;
    CHECK((w - e2).norm() < 1e-15);
  }
  SUBCASE("canceled directions are nulled") {
    for (int rep = 0; rep < 20; ++rep) {
      const CVectorXd h = sample_fading<double>(256, rng);
      const CMatrixXd c = sample_fading<double>(256, 40, rng);
      const CVectorXd w = pzf_filter(h, c);
      CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-14));
      for (Eigen::Index j = 0; j < c.cols(); ++j) CHECK(std::abs(w.dot(c.col(j))) <= 1e-10 * c.col(j).norm());
    }
  }
  SUBCASE("single precision instantiates") {
    Stream r(1);
    const CVector<float> h = sample_fading<float>(8, r);
    const CMatrix<float> c = sample_fading<float>(8, 2, r);
    const CVector<float> w = pzf_filter(h, c);
    CHECK(std::abs(w.dot(c.col(0))) < 1e-5f);
  }
  SUBCASE("errors") {
    const CVectorXd h = sample_fading<double>(4, rng);
    CHECK_THROWS_AS(pzf_filter(h, sample_fading<double>(4, 4, rng)), InfeasibleError);
    CMatrixXd dup(4, 2);
    dup.col(0) = h;
    dup.col(1) = 2.0 * h;
    CHECK_THROWS_AS(pzf_filter(sample_fading<double>(4, rng), dup), NumericalError);
    CHECK_THROWS_AS(pzf_filter(h, sample_fading<double>(5, 1, rng)), DomainError);
  }
}

TEST_CASE("cancellation targets are distance prefixes") {
  const LinkGains g = synthetic_gains(6, 3);
  const auto none = select_cancellation_targets(g, {0, 0, 8});
  CHECK(none.cellular.empty());
  CHECK(none.d2d.empty());
  const auto s = select_cancellation_targets(g, {2, 10, 20});
  CHECK(s.cellular == std::vector<std::size_t>{0, 1});
  CHECK(s.d2d == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("evaluate_sinr excludes canceled interferers exactly") {
  Stream rng(32);
  const LinkGains g = synthetic_gains(4, 4);
  const auto ch = assemble_channel_set<double>(g, 16, rng);
  const PzfParams p{2, 1, 16};
  CMatrixXd canceled(16, 3);
  canceled << ch.cellular.leftCols(2), ch.d2d.leftCols(1);
  const CVectorXd w = pzf_filter(ch.desired, canceled);
  const SinrBreakdown b = sinr_cellular(ch, w, p);
  double cell = 0.0, d2d = 0.0;
  for (Eigen::Index j = 2; j < 4; ++j) cell += std::norm(w.dot(ch.cellular.col(j)));
  for (Eigen::Index j = 1; j < 4; ++j) d2d += std::norm(w.dot(ch.d2d.col(j)));
  CHECK(b.cellular_interf == doctest::Approx(cell));
  CHECK(b.d2d_interf == doctest::Approx(d2d));
  CHECK(b.noise == doctest::Approx(0.5));
  CHECK(b.sinr == doctest::Approx(b.signal / (b.cellular_interf + b.d2d_interf + b.noise)));

  // same filter, one fewer canceled interferer counted as uncanceled: SINR cannot rise
  const SinrBreakdown more = sinr_cellular(ch, w, PzfParams{1, 1, 16});
  CHECK(more.sinr <= b.sinr);
}

TEST_CASE("SISO degenerate case") {
  Stream rng(33);
  const LinkGains g = synthetic_gains(0, 0);
  const auto ch = assemble_channel_set<double>(g, 1, rng);
  const CVectorXd w = pzf_filter(ch.desired);
  const SinrBreakdown b = sinr_d2d(ch, w, PzfParams{0, 0, 1});
  CHECK(b.sinr == doctest::Approx(2.0 * std::norm(ch.desired[0]) / 0.5));
}

TEST_CASE("post-filter gains follow Gamma(dim - m) and Exp(1)") {
  Stream rng(34);
  const std::size_t dim = 24, mc = 3, md = 2;
  LinkGains g = synthetic_gains(5, 5);
  g.desired_coeff = 1.0;
  const int n = 20000;
  std::vector<double> desired, cross;
  for (int i = 0; i < n; ++i) {
    const auto ch = assemble_channel_set<double>(g, static_cast<Eigen::Index>(dim), rng);
    CMatrixXd c(static_cast<Eigen::Index>(dim), 5);
    c << ch.cellular.leftCols(3), ch.d2d.leftCols(2);
    const CVectorXd w = pzf_filter(ch.desired, c);
    desired.push_back(std::norm(w.dot(ch.desired)));
    cross.push_back(std::norm(w.dot(ch.cellular.col(4))));
  }
  const double shape = static_cast<double>(dim - mc - md);
  CHECK(teststats::mean(desired) == doctest::Approx(shape).epsilon(0.02));
  CHECK(teststats::mean(cross) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(teststats::ks_statistic(desired, [&](double x) { return teststats::gamma_p(shape, x); }) <
        teststats::ks_critical_1pct(desired.size()));
  CHECK(teststats::ks_statistic(cross, [](double x) { return 1.0 - std::exp(-x); }) <
        teststats::ks_critical_1pct(cross.size()));
}

TEST_CASE("projected and full fading give the same SINR law") {
  LinkGains g = synthetic_gains(6, 6, 0.3);
  const PzfParams p{2, 3, 12};
  Stream r1(35), r2(36);
  std::vector<double> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(sample_sinr(g, p, FadingMode::full, r1).sinr);
    b.push_back(sample_sinr(g, p, FadingMode::projected, r2).sinr);
  }
  // two-sample KS at 1%: 1.628 sqrt(2/n)
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(a.size()));
  }
  CHECK(d < 1.628 * std::sqrt(2.0 / static_cast<double>(a.size())));
}

TEST_CASE("MRC without interferers: SINR = SNR * Gamma(M)") {
  LinkGains g = synthetic_gains(0, 0);
  Stream rng(37);
  std::vector<double> x;
  for (int i = 0; i < 20000; ++i) x.push_back(sample_full_sinr<double>(g, {0, 0, 6}, rng).sinr / 4.0);
  CHECK(teststats::ks_statistic(x, [](double v) { return teststats::gamma_p(6.0, v); }) <
        teststats::ks_critical_1pct(x.size()));
  CHECK_THROWS_AS(sample_projected_sinr(synthetic_gains(5, 5), {3, 3, 6}, rng), InfeasibleError);
}

TEST_CASE("spectral efficiency") {
  const std::vector<double> ones(10, 1.0), zeros(10, 0.0);
  CHECK(spectral_efficiency(ones).mean == 1.0);
  CHECK(spectral_efficiency(ones).ci_halfwidth == 0.0);
  CHECK(spectral_efficiency(zeros).mean == 0.0);
  CHECK_THROWS_AS(spectral_efficiency(std::vector<double>{}), DomainError);

  // lognormal SINR with 8 dB median and 6 dB spread against 1-D quadrature
  Stream rng(38);
  std::vector<double> s(50000);
  for (auto& v : s) v = db_to_linear(8.0 + 6.0 * rng.normal());
  const SeEstimate est = spectral_efficiency(s);
  const double truth =
      integrate([](double z) { return std::log2(1.0 + db_to_linear(8.0 + 6.0 * z)) * std::exp(-0.5 * z * z); },
                -12, 12)
          .value /
      std::sqrt(2.0 * M_PI);
  CHECK(std::abs(est.mean - truth) < est.ci_halfwidth * 1.5);
  CHECK(est.samples == s.size());
}

TEST_CASE("compensated sum") {
  KahanSum k;
  k.add(1e16);
  for (int i = 0; i < 1000; ++i) k.add(1.0);
  k.add(-1e16);
  CHECK(k.value() == 1000.0);
}
