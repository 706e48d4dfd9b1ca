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
#include <string>
#include <vector>

#include "qbatt/operators.hpp"

namespace qbatt {

// Units: hbar = 1, time in microseconds, angular frequencies in rad/us.
struct BatteryParams {
  int n_cells = 1;
  std::vector<double> omega;  // per cell, > 0
  std::vector<double> g;      // per bond, length n_cells - 1, > 0
  double Omega = 0.0;         // classical drive strength, >= 0
  std::optional<double> alpha; // Omega / mean(g) when set through uniform()

  // Uniform chain with Omega = alpha * g exactly.
  static BatteryParams uniform(int n_cells, double omega0, double g, double alpha);
  // Per-bond couplings; alpha is measured against the mean coupling.
  static BatteryParams with_bonds(std::vector<double> omega, std::vector<double> g, double alpha);

  void validate() const;
  double mean_g() const;
  // Mean cell frequency; equals omega0 for uniform chains.
  double omega0() const;
  // Sum of cell frequencies: the energy of the all-excited state.
  double max_energy() const;
};

enum class ChargingKind { classical, quantum };

std::string to_string(ChargingKind kind);
ChargingKind charging_kind_from_string(const std::string &name);

struct DrivingPotential {
  double v_dv = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  ChargingKind kind = ChargingKind::classical;
};

ManyBodyOperator build_H0(const BatteryParams &p);
ManyBodyOperator build_Vcl(const BatteryParams &p);
ManyBodyOperator build_Vqu(const BatteryParams &p);
ManyBodyOperator build_V(const BatteryParams &p, ChargingKind kind);

// Matrix-free forms for chains past the sparse-storage comfort zone.
LocalTermSum chain_Vcl(const BatteryParams &p);
LocalTermSum chain_Vqu(const BatteryParams &p);
LocalTermSum chain_V(const BatteryParams &p, ChargingKind kind);

// Diagonal of H0: sum of omega_n over excited cells of each basis index.
RVector energy_levels(const BatteryParams &p);

DrivingPotential driving_potential(const ManyBodyOperator &V, ChargingKind kind, const SpectralOptions &opts = {});
DrivingPotential driving_potential(const LocalTermSum &V, ChargingKind kind, const SpectralOptions &opts = {});

// v_cl / v_qu - 1 from the spectra of both charging Hamiltonians.
double eta(const BatteryParams &p, const SpectralOptions &opts = {});
// Ratio alpha at which eta vanishes for a uniform chain of n_cells cells.
double fair_alpha(int n_cells, const SpectralOptions &opts = {});

// Stored as P = -i [H0, V], so that <P> = d<H0>/dt under evolution by V.
ManyBodyOperator power_operator(const ManyBodyOperator &H0, const ManyBodyOperator &V);
// (k / 2) * omega0 * v_dv with k = 1 (classical) or 2 (quantum).
double power_bound(int k, double omega0, double v_dv);
int partition_size(ChargingKind kind);

} // namespace qbatt
