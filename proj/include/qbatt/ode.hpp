// Copyright 2026 The qbatt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dormand-Prince 5(4) with error control in the max norm. Steps are clipped so
// that every requested output time is hit exactly; no interpolation is used.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "qbatt/errors.hpp"

namespace qbatt {

struct OdeOptions {
  double atol = 1e-9;
  double rtol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  bool stopped_early = false;
};

namespace detail {

template <class T>
double scaled_error(const T &err, const T &y0, const T &y1, const OdeOptions &opt) {
  double worst = 0.0;
  const auto n = err.size();
  const auto *e = err.data();
  const auto *a = y0.data();
  const auto *b = y1.data();
  for (decltype(err.size()) i = 0; i < n; ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    worst = std::max(worst, std::abs(e[i]) / sc);
  }
  return worst;
}

template <class T>
double max_abs(const T &x) {
  double m = 0.0;
  const auto *p = x.data();
  for (decltype(x.size()) i = 0; i < x.size(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

} // namespace detail

// rhs(t, y, dydt) fills dydt. observer(index, t, y) returns false to stop.
// grid must be strictly increasing; y holds the state at grid[0] on entry.
template <class T, class Rhs, class Observer>
OdeStats dopri5(Rhs &&rhs, T y, const std::vector<double> &grid, Observer &&observer, const OdeOptions &opt = {}) {
  OdeStats stats;
  if (grid.empty()) return stats;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ArgumentError("time grid must be strictly increasing");
  }

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = grid.front();
  if (!observer(std::size_t{0}, t, static_cast<const T &>(y))) {
    stats.stopped_early = true;
    return stats;
  }
  if (grid.size() == 1) return stats;

  T k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y, err = y;
  rhs(t, y, k1);
  ++stats.rhs_evals;

  // Initial step from the local scale of y and dy/dt.
  const double d0 = detail::max_abs(y), d1 = detail::max_abs(k1);
  double h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6;
  h = std::min({h, opt.max_step, grid.back() - grid.front()});

  std::size_t next = 1;
  while (next < grid.size()) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      std::ostringstream msg;
      msg << "dopri5: step budget exhausted at t = " << t << " (accepted " << stats.accepted << ", rejected "
          << stats.rejected << ")";
      throw IntegrationError(msg.str());
    }
    const double target = grid[next];
    double step = std::min(h, target - t);
    bool lands = false;
    if (step >= target - t - 1e-12 * std::max(1.0, std::abs(target))) {
      step = target - t;
      lands = true;
    }

    tmp = y + step * a21 * k1;
    rhs(t + c2 * step, tmp, k2);
    tmp = y + step * (a31 * k1 + a32 * k2);
    rhs(t + c3 * step, tmp, k3);
    tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * step, tmp, k4);
    tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * step, tmp, k5);
    tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + step, tmp, k6);
    ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, ynew, k7);
    stats.rhs_evals += 6;
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = detail::scaled_error(err, y, ynew, opt);
    if (!std::isfinite(en)) throw IntegrationError("dopri5: non-finite error estimate at t = " + std::to_string(t));
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);

    if (en <= 1.0) {
      ++stats.accepted;
      t = lands ? target : t + step;
      std::swap(y, ynew);
      std::swap(k1, k7);
      // A step shortened to hit the grid does not shrink the controller's proposal.
      h = std::min(opt.max_step, std::max(h, step) * std::min(factor, 5.0));
      if (lands) {
        if (!observer(next, t, static_cast<const T &>(y))) {
          stats.stopped_early = true;
          return stats;
        }
        ++next;
      }
    } else {
      ++stats.rejected;
      h = step * std::max(factor, 0.2);
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw IntegrationError("dopri5: step size underflow at t = " + std::to_string(t));
      }
    }
  }
  return stats;
}

} // namespace qbatt
