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

namespace qbatt {

// A pure state vector, a dense density matrix, or a density matrix known to be
// diagonal in the computational basis (stored as its populations).
class QuantumState {
public:
  enum class Kind { pure, mixed, diagonal };

  static constexpr double kNormTolerance = 1e-9;
  static constexpr double kHermitianTolerance = 1e-10;

  QuantumState() = default;

  // Validates normalization; throws ArgumentError when off by more than 1e-9.
  static QuantumState pure(CVector psi);
  // Validates trace, hermiticity and positive semidefiniteness up to `psd_slack`.
  static QuantumState mixed(CMatrix rho, double psd_slack = 1e-9);
  static QuantumState diagonal(RVector populations);
  static QuantumState basis_state(int n_sites, std::size_t index);
  static QuantumState ground(int n_sites) { return basis_state(n_sites, 0); }
  static QuantumState maximally_mixed(int n_sites);
  // Skips validation; for integrator output checked separately.
  static QuantumState unchecked_mixed(CMatrix rho);

  Kind kind() const noexcept { return kind_; }
  bool is_pure() const noexcept { return kind_ == Kind::pure; }
  std::size_t dim() const noexcept { return dim_; }
  int n_sites() const { return sites_for_dim(dim_); }

  // Valid only for the matching kind.
  const CVector &vector() const;
  const CMatrix &matrix() const;
  const RVector &diagonal_populations() const;

  // Dense density matrix for any kind.
  CMatrix density() const;
  RVector populations() const;
  cd expectation(const ManyBodyOperator &op) const;
  // tr(rho D) for D = diag(d).
  double expectation_diagonal(const RVector &d) const;
  double trace() const;

private:
  Kind kind_ = Kind::pure;
  std::size_t dim_ = 0;
  CVector psi_;
  CMatrix rho_;
  RVector diag_;
};

} // namespace qbatt
