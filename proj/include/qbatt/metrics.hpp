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

#pragma once

#include <optional>
#include <vector>

#include "qbatt/battery.hpp"
#include "qbatt/dynamics.hpp"
#include "qbatt/operators.hpp"

namespace qbatt {

using MaybeSeries = std::vector<std::optional<double>>;

struct OptimalPower {
  double dt_max = 0.0;
  double p_opt = 0.0;
  std::size_t index = 0; // grid argmax before refinement
};

// Time axis is measured from times.front(), which is the charging start.
struct PowerSeries {
  std::vector<double> times;
  std::vector<double> average_power;
  MaybeSeries instantaneous_power; // null where t + step leaves the grid
  std::optional<OptimalPower> optimal;
};

inline constexpr double kDefaultPowerStep = 0.02; // us
inline constexpr double kBoundTolerance = 1e-6;

// Ergotropy (or energy) per grid point for each state of the trace.
std::vector<double> ergotropy_series(const ChargingTrace &trace, const ManyBodyOperator &H0);
std::vector<double> energy_series(const ChargingTrace &trace, const ManyBodyOperator &H0);

// P(dt) = E(dt) / dt with P(0) = 0. Warns when E(0) is not ~0.
PowerSeries average_power(const std::vector<double> &times, const std::vector<double> &ergotropy);
PowerSeries average_power(const ChargingTrace &trace, const ManyBodyOperator &H0);

// Grid argmax (earliest on ties) with a parabolic vertex through the
// neighbouring points when the maximum is interior and the parabola concave.
OptimalPower optimal_power(const PowerSeries &series);
OptimalPower optimal_power(const std::vector<double> &times, const std::vector<double> &average_power);

// Forward difference (E(t + step) - E(t)) / step, with E(t + step) linearly
// interpolated on the grid. Requires grid spacing <= step.
PowerSeries instantaneous_power(const std::vector<double> &times, const std::vector<double> &ergotropy,
                                double step = kDefaultPowerStep);
PowerSeries instantaneous_power(const ChargingTrace &trace, const ManyBodyOperator &H0,
                                double step = kDefaultPowerStep);

// r(t) = |P(t)| / (omega0 v_dv); throws InvariantViolation above k/2 + 1e-6.
MaybeSeries bound_ratio(const PowerSeries &series, ChargingKind kind, double omega0, double v_dv);
// |P_avg(tau)| <= (k/2) omega0 v_dv at every tau; throws InvariantViolation otherwise.
bool average_power_bound_check(const PowerSeries &series, int k, double omega0, double v_dv);

double gamma_ad(const PowerSeries &qu, const PowerSeries &cl);
double gamma_ad(double p_opt_qu, double p_opt_cl);

// Mean over bonds of <n_j n_j+1> / (<n_j><n_j+1>); null when any <n_j> < 1e-12.
std::optional<double> g2_from_populations(const RVector &populations, int n_cells);
MaybeSeries g2_correlation(const ChargingTrace &trace);
inline constexpr double kG2Floor = 1e-12;

struct PowerDeviation {
  double theory = 0.0;     // |P^E - P^erg| / P^E
  double experiment = 0.0; // |P^E - P^exp| / P^exp
};

PowerDeviation power_deviation(const PowerSeries &e_theory, const PowerSeries &erg_theory, const PowerSeries &e_exp);
PowerDeviation power_deviation(double p_e, double p_erg, double p_exp);

struct ScalingPoint {
  double n = 0.0;
  double gamma = 0.0;
};

struct ScalingFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double asymptote = 0.0; // a * pi / 2
  double residual_norm = 0.0;
  double data_norm = 0.0;
  int iterations = 0;
};

// Gamma(N) = a * atan(b N^c), c = exp(log_c) so c > 0. At most 500 iterations.
ScalingFit fit_scaling(const std::vector<ScalingPoint> &points);
double scaling_law(double a, double b, double c, double n);

} // namespace qbatt
