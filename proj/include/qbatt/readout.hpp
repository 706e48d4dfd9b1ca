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

// Independent single-qubit readout errors. The full response matrix is the
// tensor product of per-qubit 2x2 matrices and is never materialized.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qbatt/operators.hpp"

namespace qbatt {

struct QubitFidelity {
  double f0 = 1.0; // P(read 0 | prepared 0)
  double f1 = 1.0; // P(read 1 | prepared 1)
};

// A_n = [[F0, 1 - F1], [1 - F0, F1]]; column j is the outcome distribution
// for prepared state j. Qubit n acts on bit n of the basis index.
struct ReadoutModel {
  std::vector<Eigen::Matrix2d> response;

  int n_qubits() const { return static_cast<int>(response.size()); }
  std::size_t dim() const { return std::size_t{1} << response.size(); }
};

ReadoutModel build_readout_model(const std::vector<QubitFidelity> &fidelities);

RVector apply_noise(const ReadoutModel &model, const RVector &ideal);
// Exact inverse of the tensor product; entries may be negative.
RVector unbiased_inverse(const ReadoutModel &model, const RVector &noisy);
// Unbiased inverse followed by clipping negatives and renormalizing.
RVector mitigate(const ReadoutModel &model, const RVector &noisy);
// Per-outcome standard error of unbiased_inverse for frequencies from `shots`
// multinomial samples: sqrt(((A^-1 o A^-1) f - x^2) / shots), floored at 0.
RVector inverse_standard_error(const ReadoutModel &model, const RVector &frequencies, std::uint64_t shots);

// Multinomial outcome counts by sequential binomial draws.
std::vector<std::uint64_t> sample_counts(const RVector &probabilities, std::uint64_t shots, std::uint64_t seed);
RVector frequencies_from_counts(const std::vector<std::uint64_t> &counts);

} // namespace qbatt
