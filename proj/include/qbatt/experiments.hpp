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

// Experiment drivers behind the command-line subcommands. Each returns its
// output files in memory; the caller decides where they land.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbatt/config.hpp"
#include "qbatt/entanglement.hpp"
#include "qbatt/metrics.hpp"

namespace qbatt {

struct RunOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  bool include_h0 = false;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::vector<std::pair<std::string, double>> timings; // stage, wall-clock seconds
};

struct ChargingOptions {
  std::vector<double> times;
  std::optional<LindbladSpec> lindblad; // closed evolution when empty
  bool include_h0 = false;              // evolve under H0 + V instead of V
  bool split = true;                    // coherent / incoherent ergotropy
  bool keep_populations = false;
  bool g2 = false;
  // Stop once no later grid point can beat the best average power found.
  bool early_stop = false;
  std::optional<double> entropy_dt;
};

struct ChargingRun {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> ergotropy;
  std::vector<double> incoherent; // empty unless split
  std::vector<double> coherent;
  MaybeSeries g2;
  std::vector<RVector> populations;
  OptimalPower optimal;        // from ergotropy
  OptimalPower optimal_energy; // from internal energy
  std::optional<OptimalPower> optimal_incoherent;
  std::optional<OptimalPower> optimal_coherent;
  std::optional<EntropyGrowthReport> entropy;
};

// Charges from the all-ground state and tracks energy, ergotropy and g2.
ChargingRun run_charging(const BatteryParams &params, ChargingKind kind, const ChargingOptions &opts);

// Gamma_ad from two optimal powers; nullopt when the classical value is ~0.
std::optional<double> advantage(const std::optional<OptimalPower> &qu, const std::optional<OptimalPower> &cl);

CommandResult cmd_charge(const ExperimentConfig &cfg, const RunOptions &run);
CommandResult cmd_sweep_alpha(const ExperimentConfig &cfg, const RunOptions &run);
CommandResult cmd_scale(const ExperimentConfig &cfg, const RunOptions &run);
CommandResult cmd_device(const ExperimentConfig &cfg, const RunOptions &run);
CommandResult cmd_readout(const ExperimentConfig &cfg, const RunOptions &run);
CommandResult cmd_entropy(const ExperimentConfig &cfg, const RunOptions &run);

// Device-layer analysis shared by cmd_device and the acceptance checks.
struct AmplitudePoint {
  double delta_phi = 0.0;
  double predicted = 0.0;        // closed-form Omega_eff, scaled units
  double resonance = 0.0;        // drive frequency of maximal transfer
  double peak_transfer = 0.0;
  double extracted = 0.0;        // Rabi rate from the simulated oscillation
  double max_leakage = 0.0;      // single-excitation population over the window
};

// Locates the two-photon resonance and measures the exchange rate. `spec` is in
// simulation units (already frequency-scaled).
AmplitudePoint characterize_drive(const CouplerSpec &spec);

// Stream ids for derive_seed(seed, stream).
enum class SeedStream : std::uint64_t { readout_populations = 1, readout_shots = 2, sampled_purity = 3 };

std::string config_hash(const ExperimentConfig &cfg, std::uint64_t seed);

} // namespace qbatt
