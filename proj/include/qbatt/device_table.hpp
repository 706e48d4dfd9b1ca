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

// Calibration data of the twelve-qubit chain used for the open-system and
// readout experiments.

#pragma once

#include <string>
#include <vector>

#include "qbatt/dynamics.hpp"
#include "qbatt/readout.hpp"

namespace qbatt {

struct QubitCalibration {
  std::string name;
  double idle_frequency_ghz = 0.0;
  double anharmonicity_mhz = 0.0;
  double resonator_frequency_ghz = 0.0;
  double resonator_linewidth_mhz = 0.0;
  double dispersive_shift_mhz = 0.0;
  double readout_f0 = 1.0; // fraction, not percent
  double readout_f1 = 1.0;
  double t1_us = 0.0;
  double t2_ramsey_us = 0.0;
  double t2_echo_us = 0.0;
};

struct DeviceTable {
  std::vector<QubitCalibration> qubits;
  double mean_coupling_mhz = 0.0; // nearest-neighbour g / 2 pi

  void validate() const;
  // Decay rates of the first n qubits from T1 and the echo T2.
  LindbladSpec lindblad(int n_cells) const;
  std::vector<QubitFidelity> fidelities(int n_qubits) const;
};

// Built-in copy of the twelve-qubit calibration; configs/device_calibration.json
// carries the same numbers.
const DeviceTable &reference_device_table();

} // namespace qbatt
