// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "d2dmimo/core.hpp"
#include "d2dmimo/rng.hpp"

namespace d2dmimo {

/// Flat-top hexagonal cells on a lattice, cell 0 centered at the origin and
/// the remaining cells ordered ring by ring.
class CellLayout {
public:
  CellLayout() = default;
  CellLayout(std::vector<Point> centers, double side) : centers_(std::move(centers)), side_(side) {}

  std::size_t num_cells() const { return centers_.size(); }
  const Point& center(std::size_t cell) const { return centers_[cell]; }
  const std::vector<Point>& centers() const { return centers_; }
  double side() const { return side_; }
  double cell_area() const;
  /// Distance from the origin to the farthest hexagon vertex.
  double circumradius() const;

  bool contains(std::size_t cell, const Point& p) const;
  /// Lowest-index cell containing p; boundary points go to the first match.
  std::optional<std::size_t> cell_of(const Point& p) const;

private:
  std::vector<Point> centers_;
  double side_ = 0.0;
};

bool in_flat_top_hexagon(const Point& offset, double side);

CellLayout build_hex_layout(int num_rings, double side);

/// K points uniform over every hexagon, rejection-sampled from the bounding box.
std::vector<std::vector<Point>> drop_cellular_ues(const CellLayout& layout, std::size_t per_cell,
                                                  Stream& rng);

struct D2dPairs {
  std::vector<Point> tx;
  std::vector<Point> rx;
};

/// Homogeneous PPP of transmitters on a disk of `region_radius` around the
/// origin; each receiver sits `distance` away in a uniform direction.
D2dPairs drop_d2d_pairs(double region_radius, double intensity, double distance, Stream& rng);

/// Index sets Phi_0..Phi_B for the cells plus a final set for points outside
/// every hexagon.
std::vector<std::vector<std::size_t>> partition_by_cell(std::span<const Point> points,
                                                        const CellLayout& layout);

/// First min(m, |candidates|) indices by ascending distance to `ref`, ties
/// broken by index.
std::vector<std::size_t> nearest_interferers(const Point& ref, std::span<const Point> candidates,
                                             std::size_t m);

/// Full ordering of candidates by distance to `ref` (same tie-break).
std::vector<std::size_t> order_by_distance(const Point& ref, std::span<const Point> candidates);

enum class TxKind : std::uint8_t { cellular = 0, d2d = 1 };
enum class RxKind : std::uint8_t { base_station = 0, d2d = 1 };

/// Independent lognormal shadowing per (transmitter, receiver) link. Gains are
/// a pure function of the drop key and link identity, so they are stable no
/// matter which links a caller asks for or in what order.
class ShadowingField {
public:
  ShadowingField() = default;
  ShadowingField(std::uint64_t key, double sigma_db) : key_(key), sigma_db_(sigma_db) {}

  double gain(TxKind tx, std::size_t tx_index, RxKind rx, std::size_t rx_index) const;
  double sigma_db() const { return sigma_db_; }

private:
  std::uint64_t key_ = 0;
  double sigma_db_ = 0.0;
};

struct DropParams {
  std::size_t ues_per_cell = 4;
  double d2d_intensity = 0.0;  // per m^2
  double d2d_distance = 20.0;  // m
  double region_multiplier = 3.0;
  double shadowing_db = 7.0;
};

/// One realization of the network layer. Cellular UEs are stored cell-major:
/// UE k of cell b has index b * ues_per_cell + k.
struct NetworkDrop {
  CellLayout layout;
  std::size_t ues_per_cell = 0;
  std::vector<Point> cellular;
  std::vector<Point> d2d_tx;
  std::vector<Point> d2d_rx;
  double d2d_distance = 0.0;
  double region_radius = 0.0;
  ShadowingField shadowing;
  std::uint64_t seed = 0;

  std::size_t num_cellular() const { return cellular.size(); }
  std::size_t num_d2d() const { return d2d_tx.size(); }
  std::size_t cellular_index(std::size_t cell, std::size_t k) const { return cell * ues_per_cell + k; }
  std::size_t cell_of_ue(std::size_t index) const { return index / ues_per_cell; }
  /// D2D pairs whose receiver lies in cell 0.
  std::vector<std::size_t> central_d2d_receivers() const;
};

NetworkDrop make_drop(const CellLayout& layout, const DropParams& params, std::uint64_t seed);

} // namespace d2dmimo
