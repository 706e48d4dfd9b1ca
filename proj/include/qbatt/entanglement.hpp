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

#include <cstdint>
#include <vector>

#include "qbatt/dynamics.hpp"
#include "qbatt/state.hpp"

namespace qbatt {

struct Bipartition {
  int n_cells = 0;
  std::vector<int> subset; // strictly increasing cell indices of A

  int size() const { return static_cast<int>(subset.size()); }
  std::vector<int> complement() const;
  void validate() const;
};

inline constexpr std::size_t kBipartitionCap = 4096;

// All C(N, N_A) subsets in lexicographic order.
std::vector<Bipartition> enumerate_bipartitions(int n_cells, int n_a, std::size_t cap = kBipartitionCap);

// Reduced state of A; bit k of the row index is cell subset[k].
CMatrix reduced_density_matrix(const QuantumState &state, const Bipartition &part);
double purity(const QuantumState &state, const Bipartition &part);
// Natural-log Renyi-2 entropy -log tr(rho_A^2).
double renyi2(const QuantumState &state, const Bipartition &part);

struct EntropyGrowthReport {
  std::vector<double> per_size; // index N_A - 1
  double average = 0.0;         // unweighted mean over N_A = 1..N-1
  double dt_used = 0.0;
  bool corrected = false;
};

inline constexpr double kDefaultEntropyDt = 0.107; // us

// Compares the states at times.front() and the grid point nearest times.front() + dt.
EntropyGrowthReport entropy_growth(const ChargingTrace &trace, double dt = kDefaultEntropyDt);
EntropyGrowthReport entropy_growth(const QuantumState &initial, const QuantumState &final_state, double dt_used);

double noise_correct(double entropy, int n_a, int n_cells);

struct SampledPurity {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Randomized-measurement estimate of tr(rho_A^2): Haar-random single-cell
// unitaries, n_shots projective samples each, Hamming-weighted pair estimator.
SampledPurity sampled_purity(const QuantumState &state, const Bipartition &part, int n_unitaries, int n_shots,
                             std::uint64_t seed);

} // namespace qbatt
