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

#include "qbatt/operators.hpp"
#include "qbatt/state.hpp"

namespace qbatt {

struct PassiveDecomposition {
  RVector eigenvalues_desc; // spectrum of rho, nonincreasing
  RVector energies_asc;     // spectrum of H0, nondecreasing
  double passive_energy = 0.0;
};

struct ErgotropyResult {
  double value = 0.0;
  PassiveDecomposition decomposition;
};

// coherent is defined as total - incoherent, never from an explicit state.
struct ErgotropyReport {
  double total = 0.0;
  double incoherent = 0.0;
  double coherent = 0.0;
  double internal_energy = 0.0;
};

// Sorted spectrum of H0, computed once and reused across a trace.
class ReferenceSpectrum {
public:
  explicit ReferenceSpectrum(const ManyBodyOperator &H0);

  const ManyBodyOperator &hamiltonian() const { return H0_; }
  const RVector &energies_asc() const { return sorted_; }
  bool is_diagonal() const { return diagonal_; }
  // Diagonal of H0 in basis order; meaningful when is_diagonal().
  const RVector &diagonal_energies() const { return diag_; }
  double ground_energy() const { return sorted_(0); }

private:
  ManyBodyOperator H0_;
  RVector sorted_;
  RVector diag_;
  bool diagonal_ = false;
};

// Largest mixed-state dimension handled by the dense eigensolver.
inline constexpr std::size_t kErgotropyDenseCap = 1024;
// Most negative density-matrix eigenvalue accepted as numerical noise.
inline constexpr double kPsdSlack = 1e-6;

double internal_energy(const QuantumState &state, const ManyBodyOperator &H0);
double internal_energy(const QuantumState &state, const ReferenceSpectrum &spectrum);

// Pairs probabilities sorted descending with energies ascending. Ties are broken
// by basis index, which leaves the result unchanged.
PassiveDecomposition passive_decomposition(const RVector &probabilities, const RVector &energies_asc);
double passive_energy(const RVector &probabilities, const RVector &energies_asc);

ErgotropyResult ergotropy(const QuantumState &state, const ManyBodyOperator &H0);
ErgotropyResult ergotropy(const QuantumState &state, const ReferenceSpectrum &spectrum);
// Scalar-only variant that skips building the decomposition vectors.
double ergotropy_value(const QuantumState &state, const ReferenceSpectrum &spectrum);

// Zeroes coherences in the computational basis (H0 is diagonal there).
QuantumState dephase_energy_basis(const QuantumState &state, const ManyBodyOperator &H0);

ErgotropyReport ergotropy_split(const QuantumState &state, const ManyBodyOperator &H0);
ErgotropyReport ergotropy_split(const QuantumState &state, const ReferenceSpectrum &spectrum);
// Pure-state fast path: total = <H0> - E_ground, incoherent from populations.
ErgotropyReport ergotropy_split_pure(const CVector &psi, const ReferenceSpectrum &spectrum);

} // namespace qbatt
