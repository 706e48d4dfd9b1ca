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

// Qubit-coupler-qubit model under flux modulation of the coupler. All three
// bodies are two-level. Basis index bit 0 = Q1, bit 1 = Q2, bit 2 = coupler,
// with bit value 1 the higher-energy level.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qbatt/ode.hpp"
#include "qbatt/operators.hpp"

namespace qbatt {

struct CouplerSpec {
  double omega_q1 = 0.0;    // rad/us
  double omega_q2 = 0.0;    // rad/us
  double omega_c_max = 0.0; // rad/us
  double d = 0.0;           // SQUID asymmetry in [0, 1]
  double g1 = 0.0;          // rad/us
  double g2 = 0.0;          // rad/us
  double phi_dc = 0.0;      // flux quanta
  double delta_phi = 0.0;   // flux quanta, |delta_phi| < 0.5
  double omega_phi = 0.0;   // rad/us
  double phi0_phase = 0.0;  // rad

  void validate() const;
  // Multiplies every frequency and coupling by `factor`; times scale by 1/factor.
  CouplerSpec scaled(double factor) const;
};

inline constexpr Eigen::Index kDeviceDim = 8;
inline constexpr Eigen::Index kIndex00 = 0;
inline constexpr Eigen::Index kIndex11 = 3;

// omega_c_max * (cos^2(pi phi) + d^2 sin^2(pi phi))^(1/4)
double coupler_frequency(const CouplerSpec &spec, double phi);
// d omega_c / d phi, analytic.
double coupler_frequency_derivative(const CouplerSpec &spec, double phi);
double flux_at(const CouplerSpec &spec, double t);

// Dispersive |00> <-> |11> coupling from the second-order sideband expansion.
double effective_coupling(const CouplerSpec &spec);

// 8x8 lab-frame Hamiltonian at a given coupler flux.
Eigen::Matrix<cd, 8, 8> device_hamiltonian(const CouplerSpec &spec, double phi);
// Dressed E(|11,g>) - E(|00,g>) of the static Hamiltonian at phi_dc.
double dressed_sum_frequency(const CouplerSpec &spec);

struct DeviceTrace {
  std::vector<double> times;
  std::vector<Eigen::Matrix<double, 8, 1>> populations;
  double max_norm_drift = 0.0;
};

inline constexpr int kSamplesPerDrivePeriod = 20;

OdeOptions device_ode_options();

// Time-dependent Schroedinger evolution from |00,g> on the grid. The grid
// spacing must resolve the drive: at least 20 samples per 2 pi / omega_phi.
DeviceTrace simulate_parametric(const CouplerSpec &spec, const std::vector<double> &times,
                                const OdeOptions &opts = device_ode_options());

// One-period propagator U(T, 0), T = 2 pi / omega_phi.
Eigen::Matrix<cd, 8, 8> floquet_period_propagator(const CouplerSpec &spec, const OdeOptions &opts = device_ode_options());
// Populations at t = k T, k = 0..n_periods, from |00,g>.
DeviceTrace stroboscopic_evolution(const CouplerSpec &spec, int n_periods);

// Qubit-marginal probabilities: both excited, and exactly one excited.
double both_excited(const Eigen::Matrix<double, 8, 1> &p);
double single_excited(const Eigen::Matrix<double, 8, 1> &p);

struct ResonancePoint {
  double omega_phi = 0.0;
  double transfer = 0.0; // max over the window of P(both excited)
};

struct ResonanceScan {
  std::vector<ResonancePoint> points;
  std::size_t peak_index = 0;
  double peak_width = 0.0; // full width at half maximum, linear interpolation
};

// duration is the observation window (us); sampling is stroboscopic.
double transfer_amplitude(const CouplerSpec &spec, double omega_phi, double duration);
ResonanceScan resonance_scan(const CouplerSpec &spec, const std::vector<double> &omega_phi_values, double duration,
                             int threads = 1);
// Golden-section maximization of the transfer in [lo, hi].
ResonancePoint find_resonance(const CouplerSpec &spec, double lo, double hi, double duration, double tol);

// Dominant angular frequency of a population signal by DFT, refined by a
// sinusoid least-squares fit. Returns half the population-oscillation angular
// frequency, i.e. the Rabi coupling of a sin^2(g t) signal.
double extract_oscillation_frequency(const std::vector<double> &times, const std::vector<double> &series);

} // namespace qbatt
