// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "d2dmimo/core.hpp"

namespace d2dmimo {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int max_intervals = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// Kronrod 15-point abscissae/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadratureResult gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kron * h, std::abs((kron - gauss) * h), 1};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the interval with the
/// largest error estimate is bisected until the total error meets tolerance.
template <typename F>
QuadratureResult integrate(F f, double a, double b, const QuadratureOptions& opt = {}) {
  struct Piece {
    double a, b;
    QuadratureResult r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  heap.push({a, b, detail::gk15(f, a, b)});
  double value = heap.top().r.value;
  double error = heap.top().r.error;
  int intervals = 1;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (intervals >= opt.max_intervals)
      throw NumericalError("integrate: tolerance not met after " + std::to_string(intervals) +
                           " subintervals (error estimate " + std::to_string(error) + ")");
    Piece p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    Piece left{p.a, mid, detail::gk15(f, p.a, mid)};
    Piece right{mid, p.b, detail::gk15(f, mid, p.b)};
    value += left.r.value + right.r.value - p.r.value;
    error += left.r.error + right.r.error - p.r.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum from the pieces so the running update's rounding does not leak out.
  double total = 0.0, total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().r.value;
    total_err += heap.top().r.error;
    heap.pop();
  }
  return {total, total_err, intervals};
}

} // namespace d2dmimo
