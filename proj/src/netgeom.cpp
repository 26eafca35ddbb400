// SPDX-License-Identifier: Apache-2.0
#include "d2dmimo/netgeom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace d2dmimo {
namespace {

constexpr double kSqrt3 = 1.73205080756887729353;
constexpr double kTwoPi = 6.28318530717958647693;

int hex_distance(int q, int r) { return (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2; }

} // namespace

bool in_flat_top_hexagon(const Point& offset, double side) {
  const double x = std::abs(offset.x());
  const double y = std::abs(offset.y());
  return y <= 0.5 * kSqrt3 * side && kSqrt3 * x + y <= kSqrt3 * side;
}

double CellLayout::cell_area() const { return 1.5 * kSqrt3 * side_ * side_; }

double CellLayout::circumradius() const {
  double far = 0.0;
  for (const Point& c : centers_) far = std::max(far, c.norm());
  return far + side_;
}

bool CellLayout::contains(std::size_t cell, const Point& p) const {
  return in_flat_top_hexagon(p - centers_[cell], side_);
}

std::optional<std::size_t> CellLayout::cell_of(const Point& p) const {
  // Lattice rounding would be O(1); cell counts are small enough that a scan
  // keeps the boundary rule obvious.
  for (std::size_t b = 0; b < centers_.size(); ++b)
    if (contains(b, p)) return b;
  return std::nullopt;
}

CellLayout build_hex_layout(int num_rings, double side) {
  if (num_rings < 0) throw DomainError("build_hex_layout: num_rings must be >= 0");
  if (!(side > 0.0)) throw DomainError("build_hex_layout: side length must be > 0");

  struct Axial {
    int q, r, ring;
    double angle;
    Point center;
  };
  std::vector<Axial> cells;
  for (int q = -num_rings; q <= num_rings; ++q) {
    for (int r = std::max(-num_rings, -q - num_rings); r <= std::min(num_rings, -q + num_rings); ++r) {
      Point c{1.5 * side * q, kSqrt3 * side * (r + 0.5 * q)};
      double angle = std::atan2(c.y(), c.x());
      if (angle < 0.0) angle += kTwoPi;
      cells.push_back({q, r, hex_distance(q, r), angle, c});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Axial& a, const Axial& b) {
    return std::tie(a.ring, a.angle) < std::tie(b.ring, b.angle);
  });

  std::vector<Point> centers;
  centers.reserve(cells.size());
  for (const Axial& a : cells) centers.push_back(a.ring == 0 ? Point::Zero() : a.center);
  return CellLayout(std::move(centers), side);
}

std::vector<std::vector<Point>> drop_cellular_ues(const CellLayout& layout, std::size_t per_cell,
                                                  Stream& rng) {
  if (per_cell < 1) throw DomainError("drop_cellular_ues: K must be >= 1");
  const double side = layout.side();
  const double half_height = 0.5 * kSqrt3 * side;
  std::vector<std::vector<Point>> out(layout.num_cells());
  for (std::size_t b = 0; b < layout.num_cells(); ++b) {
    auto& pts = out[b];
    pts.reserve(per_cell);
    while (pts.size() < per_cell) {
      Point offset{rng.uniform(-side, side), rng.uniform(-half_height, half_height)};
      if (in_flat_top_hexagon(offset, side)) pts.push_back(layout.center(b) + offset);
    }
  }
  return out;
}

D2dPairs drop_d2d_pairs(double region_radius, double intensity, double distance, Stream& rng) {
  if (intensity < 0.0 || distance < 0.0 || region_radius < 0.0)
    throw DomainError("drop_d2d_pairs: intensity, distance and radius must be >= 0");
  D2dPairs pairs;
  const double area = kTwoPi * 0.5 * region_radius * region_radius;
  const std::uint64_t count = rng.poisson(intensity * area);
  pairs.tx.reserve(count);
  pairs.rx.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double radius = region_radius * std::sqrt(rng.uniform());
    const double theta = kTwoPi * rng.uniform();
    const double phi = kTwoPi * rng.uniform();
    Point tx{radius * std::cos(theta), radius * std::sin(theta)};
    pairs.tx.push_back(tx);
    pairs.rx.push_back(tx + distance * Point{std::cos(phi), std::sin(phi)});
  }
  return pairs;
}

std::vector<std::vector<std::size_t>> partition_by_cell(std::span<const Point> points,
                                                        const CellLayout& layout) {
  std::vector<std::vector<std::size_t>> sets(layout.num_cells() + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cell = layout.cell_of(points[i]);
    sets[cell ? *cell : layout.num_cells()].push_back(i);
  }
  return sets;
}

std::vector<std::size_t> order_by_distance(const Point& ref, std::span<const Point> candidates) {
  std::vector<double> dist2(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) dist2[i] = (candidates[i] - ref).squaredNorm();
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return dist2[a] < dist2[b] || (dist2[a] == dist2[b] && a < b);
  });
  return idx;
}

std::vector<std::size_t> nearest_interferers(const Point& ref, std::span<const Point> candidates,
                                             std::size_t m) {
  const std::size_t take = std::min(m, candidates.size());
  if (take == 0) return {};
  std::vector<double> dist2(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) dist2[i] = (candidates[i] - ref).squaredNorm();
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist2[a] < dist2[b] || (dist2[a] == dist2[b] && a < b);
                    });
  idx.resize(take);
  return idx;
}

double ShadowingField::gain(TxKind tx, std::size_t tx_index, RxKind rx, std::size_t rx_index) const {
  if (sigma_db_ == 0.0) return 1.0;
  Stream s(derive_seed(key_, {static_cast<std::uint64_t>(tx), tx_index,
                              static_cast<std::uint64_t>(rx), rx_index}));
  return db_to_linear(sigma_db_ * s.normal());
}

std::vector<std::size_t> NetworkDrop::central_d2d_receivers() const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < d2d_rx.size(); ++r)
    if (layout.contains(0, d2d_rx[r])) out.push_back(r);
  return out;
}

NetworkDrop make_drop(const CellLayout& layout, const DropParams& params, std::uint64_t seed) {
  NetworkDrop drop;
  drop.layout = layout;
  drop.ues_per_cell = params.ues_per_cell;
  drop.d2d_distance = params.d2d_distance;
  drop.region_radius = params.region_multiplier * layout.circumradius();
  drop.seed = seed;

  Stream ue_rng(derive_seed(seed, {1}));
  for (auto& cell : drop_cellular_ues(layout, params.ues_per_cell, ue_rng))
    drop.cellular.insert(drop.cellular.end(), cell.begin(), cell.end());

  Stream d2d_rng(derive_seed(seed, {2}));
  auto pairs = drop_d2d_pairs(drop.region_radius, params.d2d_intensity, params.d2d_distance, d2d_rng);
  drop.d2d_tx = std::move(pairs.tx);
  drop.d2d_rx = std::move(pairs.rx);

  drop.shadowing = ShadowingField(derive_seed(seed, {3}), params.shadowing_db);
  return drop;
}

} // namespace d2dmimo
