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

#include "qbatt/device_table.hpp"

#include <array>
#include <sstream>

#include "qbatt/errors.hpp"

namespace qbatt {

void DeviceTable::validate() const {
  if (qubits.empty()) throw ArgumentError("device table has no qubits");
  if (!(mean_coupling_mhz > 0.0)) throw ArgumentError("mean coupling must be positive");
  for (const auto &q : qubits) {
    auto fail = [&](const char *what) {
      std::ostringstream msg;
      msg << q.name << ": " << what;
      throw ArgumentError(msg.str());
    };
    if (!(q.t1_us > 0.0) || !(q.t2_echo_us > 0.0) || !(q.t2_ramsey_us > 0.0)) fail("coherence times must be positive");
    if (q.t2_echo_us > 2.0 * q.t1_us) fail("echo T2 exceeds 2 T1");
    if (!(q.readout_f0 > 0.5 && q.readout_f0 <= 1.0 && q.readout_f1 > 0.5 && q.readout_f1 <= 1.0)) {
      fail("readout fidelities must lie in (0.5, 1]");
    }
  }
}

LindbladSpec DeviceTable::lindblad(int n_cells) const {
  if (n_cells < 1 || static_cast<std::size_t>(n_cells) > qubits.size()) {
    throw CapacityError("device table has only " + std::to_string(qubits.size()) + " qubits");
  }
  std::vector<DecayRates> rates;
  for (int i = 0; i < n_cells; ++i) {
    const auto &q = qubits[static_cast<std::size_t>(i)];
    rates.push_back(rates_from_times(q.t1_us, q.t2_echo_us));
  }
  return LindbladSpec::from_rates(rates);
}

std::vector<QubitFidelity> DeviceTable::fidelities(int n_qubits) const {
  if (n_qubits < 1 || static_cast<std::size_t>(n_qubits) > qubits.size()) {
    throw CapacityError("device table has only " + std::to_string(qubits.size()) + " qubits");
  }
  std::vector<QubitFidelity> out;
  for (int i = 0; i < n_qubits; ++i) {
    const auto &q = qubits[static_cast<std::size_t>(i)];
    out.push_back({q.readout_f0, q.readout_f1});
  }
  return out;
}

const DeviceTable &reference_device_table() {
  static const DeviceTable table = [] {
    constexpr std::array<double, 12> idle{4.575, 4.249, 4.412, 3.897, 4.292, 4.445,
                                          3.999, 4.303, 3.897, 4.242, 4.007, 4.408};
    constexpr std::array<double, 12> anharm{-199.96, -200.26, -200.13, -200.48, -200.53, -200.56,
                                            -200.42, -200.56, -199.89, -200.36, -200.76, -199.99};
    constexpr std::array<double, 12> resonator{6.271, 6.512, 6.316, 6.492, 6.248, 6.522,
                                               6.285, 6.423, 6.305, 6.482, 6.389, 6.542};
    constexpr std::array<double, 12> linewidth{0.77, 0.90, 0.82, 0.54, 0.80, 0.82, 0.63, 0.98, 0.80, 0.55, 0.89, 0.82};
    constexpr std::array<double, 12> chi{1.18, 0.84, 1.07, 0.59, 0.83, 0.80, 0.64, 0.80, 0.61, 0.68, 0.60, 0.69};
    constexpr std::array<double, 12> f0{93.6, 95.2, 95.5, 90.4, 94.2, 90.1, 85.9, 90.7, 92.9, 92.4, 91.6, 93.7};
    constexpr std::array<double, 12> f1{85.1, 84.6, 84.1, 87.0, 85.8, 81.7, 78.6, 76.5, 79.2, 78.7, 78.8, 85.1};
    constexpr std::array<double, 12> t1{28.7, 39.9, 37.0, 54.1, 17.5, 19.5, 36.9, 32.8, 37.0, 30.6, 23.5, 29.0};
    constexpr std::array<double, 12> ramsey{8.1, 1.4, 1.7, 1.6, 2.3, 1.9, 1.5, 1.6, 1.2, 1.5, 2.4, 3.5};
    constexpr std::array<double, 12> echo{14.3, 3.9, 3.4, 3.1, 3.8, 3.1, 3.3, 3.0, 2.7, 2.4, 4.1, 7.9};
    DeviceTable t;
    t.mean_coupling_mhz = 1.03;
    for (std::size_t i = 0; i < 12; ++i) {
      t.qubits.push_back({"Q" + std::to_string(i + 1), idle[i], anharm[i], resonator[i], linewidth[i], chi[i],
                          f0[i] / 100.0, f1[i] / 100.0, t1[i], ramsey[i], echo[i]});
    }
    return t;
  }();
  return table;
}

} // namespace qbatt
