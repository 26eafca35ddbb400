// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <map>

#include "d2dmimo/netgeom.hpp"
#include "support/stats.hpp"

using namespace d2dmimo;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("hex layouts") {
  const CellLayout one = build_hex_layout(0, 500);
  CHECK(one.num_cells() == 1);
  CHECK(one.center(0).norm() == 0.0);

  const CellLayout seven = build_hex_layout(1, 500);
  REQUIRE(seven.num_cells() == 7);
  double nearest = 1e9;
  for (std::size_t b = 1; b < 7; ++b) nearest = std::min(nearest, seven.center(b).norm());
  CHECK(nearest == doctest::Approx(std::sqrt(3.0) * 500).epsilon(1e-12));

  const CellLayout nineteen = build_hex_layout(2, 500);
  CHECK(nineteen.num_cells() == 19);
  CHECK(nineteen.center(0).norm() == 0.0);
  CHECK_THROWS_AS(build_hex_layout(-1, 500), DomainError);
}

TEST_CASE("hexagons tile without overlap and without gaps inside the layout") {
  const CellLayout layout = build_hex_layout(2, 500);
  // Brute-force point-in-polygon over a grid: no point is claimed twice, and
  // every point within the inner radius of the covered area is claimed.
  std::size_t claimed = 0;
  for (double x = -2600; x <= 2600; x += 23.7)
    for (double y = -2600; y <= 2600; y += 23.7) {
      const Point p{x, y};
      int hits = 0;
      for (std::size_t b = 0; b < layout.num_cells(); ++b) hits += layout.contains(b, p) ? 1 : 0;
      CHECK(hits <= 1);
      // any point this close has its lattice cell center within ring 2
      if (p.norm() < 1000.0) CHECK(hits == 1);
      claimed += static_cast<std::size_t>(hits);
    }
  CHECK(claimed > 0);
}

TEST_CASE("cellular UE drop") {
  Stream rng(5);
  const CellLayout single = build_hex_layout(0, 500);
  const auto pts1 = drop_cellular_ues(single, 4, rng);
  REQUIRE(pts1.size() == 1);
  CHECK(pts1[0].size() == 4);
  for (const Point& p : pts1[0]) CHECK(single.contains(0, p));

  const CellLayout layout = build_hex_layout(2, 500);
  const auto pts = drop_cellular_ues(layout, 4, rng);
  std::size_t total = 0;
  for (std::size_t b = 0; b < pts.size(); ++b) {
    CHECK(pts[b].size() == 4);
    for (const Point& p : pts[b]) CHECK(layout.contains(b, p));
    total += pts[b].size();
  }
  CHECK(total == 76);
}

TEST_CASE("cellular UE positions are centered on their cell") {
  const CellLayout layout = build_hex_layout(1, 500);
  Stream rng(6);
  const int n = 100000;
  Point sum = Point::Zero();
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point off = drop_cellular_ues(layout, 1, rng)[3][0] - layout.center(3);
    sum += off;
    sq += off.squaredNorm();
  }
  const Point m = sum / n;
  const double sd = std::sqrt(sq / n / 2.0 / n);  // per-coordinate standard error
  CHECK(std::abs(m.x()) < 3 * sd);
  CHECK(std::abs(m.y()) < 3 * sd);
}

TEST_CASE("D2D pairs") {
  Stream rng(7);
  CHECK(drop_d2d_pairs(3000, 0.0, 20, rng).tx.empty());
  const auto pairs = drop_d2d_pairs(3000, 1e-5, 20, rng);
  REQUIRE(!pairs.tx.empty());
  for (std::size_t i = 0; i < pairs.tx.size(); ++i) {
    CHECK((pairs.rx[i] - pairs.tx[i]).norm() == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(pairs.tx[i].norm() <= 3000.0);
  }
}

TEST_CASE("PPP count over the layout disk has the Poisson mean") {
  const CellLayout layout = build_hex_layout(2, 500);
  const double lambda = 12.0 / (kPi * 500 * 500);
  const double radius = layout.circumradius();
  Stream rng(8);
  std::vector<double> counts(10000);
  for (auto& c : counts) c = static_cast<double>(drop_d2d_pairs(radius, lambda, 20, rng).tx.size());
  const double mu = lambda * kPi * radius * radius;
  CHECK(teststats::mean(counts) == doctest::Approx(mu).epsilon(3 * std::sqrt(mu / 10000) / mu));
}

TEST_CASE("PPP count in a sub-region passes a chi-square fit") {
  const double lambda = 12.0 / (kPi * 500 * 500);
  Stream rng(9);
  const int drops = 10000;
  std::map<int, int> hist;
  for (int d = 0; d < drops; ++d) {
    const auto pairs = drop_d2d_pairs(1500, lambda, 20, rng);
    int k = 0;
    for (const Point& p : pairs.tx) k += p.norm() < 500.0 ? 1 : 0;  // mean 12
    ++hist[std::clamp(k, 5, 20)];
  }
  const double mu = 12.0;
  double chi2 = 0.0;
  int bins = 0;
  for (int k = 5; k <= 20; ++k) {
    double p = 0.0;
    auto pmf = [&](int j) { return std::exp(j * std::log(mu) - mu - std::lgamma(j + 1.0)); };
    if (k == 5) {
      for (int j = 0; j <= 5; ++j) p += pmf(j);
    } else if (k == 20) {
      p = 1.0;
      for (int j = 0; j < 20; ++j) p -= pmf(j);
    } else {
      p = pmf(k);
    }
    const double expect = drops * p;
    chi2 += (hist[k] - expect) * (hist[k] - expect) / expect;
    ++bins;
  }
  CHECK(chi2 < teststats::chi2_quantile(bins - 1));
}

TEST_CASE("m-th nearest PPP distance follows the generalized Gamma law") {
  const double lambda = 12.0 / (kPi * 500 * 500);
  Stream rng(10);
  for (std::size_t m : {1u, 3u}) {
    std::vector<double> r;
    for (int d = 0; d < 10000; ++d) {
      const auto pairs = drop_d2d_pairs(2500, lambda, 20, rng);
      const auto idx = nearest_interferers(Point::Zero(), pairs.tx, m);
      REQUIRE(idx.size() == m);
      r.push_back(pairs.tx[idx.back()].norm());
    }
    // P(R_m <= r) = P(Poisson(lambda pi r^2) >= m) = P(m, lambda pi r^2)
    const double d = teststats::ks_statistic(r, [&](double x) {
      return teststats::gamma_p(static_cast<double>(m), lambda * kPi * x * x);
    });
    CHECK(d < teststats::ks_critical_1pct(r.size()));
  }
}

TEST_CASE("partition by cell") {
  const CellLayout layout = build_hex_layout(2, 500);
  const std::vector<Point> fixed = {Point::Zero(), Point{5000, 0}};
  const auto s = partition_by_cell(fixed, layout);
  REQUIRE(s.size() == 20);
  CHECK(s[0] == std::vector<std::size_t>{0});
  CHECK(s[19] == std::vector<std::size_t>{1});

  Stream rng(12);
  const auto pairs = drop_d2d_pairs(3 * layout.circumradius(), 2e-5, 20, rng);
  const auto sets = partition_by_cell(pairs.tx, layout);
  std::vector<int> seen(pairs.tx.size(), 0);
  for (const auto& set : sets)
    for (std::size_t i : set) ++seen[i];
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("nearest interferers") {
  const std::vector<Point> pts = {{3, 0}, {1, 0}, {2, 0}};
  CHECK(nearest_interferers(Point::Zero(), pts, 0).empty());
  CHECK(nearest_interferers(Point::Zero(), pts, 2) == std::vector<std::size_t>{1, 2});
  CHECK(nearest_interferers(Point::Zero(), pts, 10) == std::vector<std::size_t>{1, 2, 0});
  // ties go to the lower index
  const std::vector<Point> tie = {{0, 1}, {1, 0}, {-1, 0}};
  CHECK(nearest_interferers(Point::Zero(), tie, 2) == std::vector<std::size_t>{0, 1});
  const auto full = order_by_distance(Point::Zero(), pts);
  CHECK(full == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("network drops") {
  const CellLayout layout = build_hex_layout(2, 500);
  DropParams p;
  p.d2d_intensity = 12.0 / (kPi * 500 * 500);
  const NetworkDrop a = make_drop(layout, p, 77);
  const NetworkDrop b = make_drop(layout, p, 77);
  REQUIRE(a.num_cellular() == 76);
  CHECK(a.cellular == b.cellular);
  CHECK(a.d2d_tx == b.d2d_tx);
  CHECK(a.d2d_rx == b.d2d_rx);
  for (std::size_t i = 0; i < a.num_d2d(); ++i)
    CHECK(a.shadowing.gain(TxKind::d2d, i, RxKind::base_station, 0) ==
          b.shadowing.gain(TxKind::d2d, i, RxKind::base_station, 0));
  for (std::size_t u = 0; u < a.num_cellular(); ++u) {
    CHECK(a.cell_of_ue(u) == u / 4);
    CHECK(layout.contains(a.cell_of_ue(u), a.cellular[u]));
    CHECK(a.shadowing.gain(TxKind::cellular, u, RxKind::base_station, 0) > 0.0);
  }
  const NetworkDrop c = make_drop(layout, p, 78);
  CHECK(c.cellular != a.cellular);
  for (std::size_t r : a.central_d2d_receivers()) CHECK(layout.contains(0, a.d2d_rx[r]));
}

TEST_CASE("shadowing is a pure function of the link") {
  const ShadowingField f(123, 7.0);
  const double g = f.gain(TxKind::d2d, 5, RxKind::d2d, 9);
  CHECK(f.gain(TxKind::d2d, 5, RxKind::d2d, 9) == g);
  CHECK(f.gain(TxKind::d2d, 5, RxKind::d2d, 8) != g);
  CHECK(f.gain(TxKind::cellular, 5, RxKind::d2d, 9) != g);
  CHECK(ShadowingField(123, 0.0).gain(TxKind::d2d, 5, RxKind::d2d, 9) == 1.0);
}
