// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace d2dmimo {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The output block is a pure function of (key, counter), so any stream can
/// be positioned without touching shared state. Satisfies
/// UniformRandomBitGenerator with 32-bit results.
class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() = default;
  Philox4x32(std::uint64_t key, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Ten rounds applied to one counter block.
  static Block encrypt(Block counter, Key key);

  void discard(std::uint64_t n);

private:
  void refill();

  Key key_{};
  Block counter_{};
  Block buffer_{};
  int used_ = 4;
};

/// Mixes a master seed with a path of integers (sweep index, drop index,
/// phase tag, ...) into an independent 64-bit stream key.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Random stream with the variates the simulator needs.
class Stream {
public:
  using result_type = Philox4x32::result_type;

  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0) : engine_(seed, stream_id) {}

  static constexpr result_type min() { return Philox4x32::min(); }
  static constexpr result_type max() { return Philox4x32::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  /// Circularly-symmetric CN(0, 1).
  std::complex<double> complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  std::uint64_t poisson(double mean);

private:
  Philox4x32 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace d2dmimo
