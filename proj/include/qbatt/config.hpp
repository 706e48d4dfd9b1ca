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

// Experiment configuration: one JSON document per run. Field names ending in
// `_mhz` hold an ordinary frequency f and are stored as omega = 2 pi f in
// rad/us; `_rad_per_us` fields are taken literally. Unknown keys are errors.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbatt/battery.hpp"
#include "qbatt/device.hpp"
#include "qbatt/device_table.hpp"
#include "qbatt/dynamics.hpp"
#include "qbatt/readout.hpp"

namespace qbatt {

struct TimeGridConfig {
  double t_max_us = 1.0;
  double step_us = 0.002;
  std::vector<double> values() const { return uniform_grid(t_max_us, step_us); }
};

struct BatteryConfig {
  std::optional<int> n_cells;
  std::optional<std::pair<int, int>> n_range; // inclusive
  double omega0 = 1.0;                        // rad/us
  std::optional<double> g;                    // uniform coupling, rad/us
  std::vector<double> bonds;                  // per-bond couplings, rad/us
  std::optional<double> alpha;
  std::optional<double> Omega; // rad/us; alternative to alpha
  std::vector<double> alpha_values;
  std::vector<ChargingKind> kinds{ChargingKind::classical, ChargingKind::quantum};

  std::vector<int> cell_counts() const;
  // Parameters for n cells with the configured alpha (or alpha_override).
  BatteryParams params(int n, std::optional<double> alpha_override = std::nullopt) const;
};

enum class DecoherenceSource { none, table, uniform };

struct DecoherenceConfig {
  DecoherenceSource source = DecoherenceSource::none;
  double t1_us = 0.0; // uniform source only
  double t2_us = 0.0;
};

struct AnalysisConfig {
  bool g2 = true;
  bool split_ergotropy = true;
  bool bounds = true;
  bool entropy = false;
  double entropy_dt_us = 0.107;
  double power_step_us = 0.02;
  bool include_h0 = false;
  int sampled_unitaries = 0; // randomized-measurement purity, 0 disables
  int sampled_shots = 0;
};

struct DeviceConfig {
  CouplerSpec coupler;           // rad/us, before frequency scaling
  double frequency_scale = 1e-3; // applied to every frequency before simulation
  int scan_points = 61;
  double scan_half_width = 3.0;     // in units of |Omega_eff|
  std::vector<double> amplitudes;   // delta_phi values for the amplitude scan
  std::optional<double> duration_us; // scaled-time window, default 1.2 pi / |Omega_eff|
};

struct ReadoutConfig {
  std::vector<QubitFidelity> fidelities;
  std::uint64_t shots = 100000;
};

struct ExperimentConfig {
  std::optional<BatteryConfig> battery;
  DecoherenceConfig decoherence;
  TimeGridConfig time;
  AnalysisConfig analysis;
  std::optional<DeviceConfig> device;
  std::optional<ReadoutConfig> readout;
  DeviceTable device_table = reference_device_table();
  std::string output;
  std::uint64_t seed = 0;
  // Normalized document (sorted keys) used for hashing.
  nlohmann::json document;

  // Lindblad rates for n cells, or nullopt for closed evolution.
  std::optional<LindbladSpec> lindblad(int n_cells) const;
};

// Throws ConfigError; the field is a JSON pointer, parse errors carry line:column.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);

double mhz_to_rad_per_us(double mhz);

} // namespace qbatt
