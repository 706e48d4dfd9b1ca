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

#include "qbatt/ergotropy.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qbatt/errors.hpp"

namespace qbatt {

namespace {

RVector sorted_copy(const RVector &v, bool descending) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (descending) {
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) > v(b); });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  }
  RVector out(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(idx[k]);
  return out;
}

void require_dim(const QuantumState &state, std::size_t dim) {
  if (state.dim() != dim) {
    throw ArgumentError("state dimension " + std::to_string(state.dim()) + " does not match H0 dimension " +
                        std::to_string(dim));
  }
}

// Spectrum of rho for any state kind, unsorted.
RVector state_spectrum(const QuantumState &state) {
  switch (state.kind()) {
  case QuantumState::Kind::pure: {
    RVector p = RVector::Zero(static_cast<Eigen::Index>(state.dim()));
    p(0) = state.vector().squaredNorm();
    return p;
  }
  case QuantumState::Kind::diagonal:
    return state.diagonal_populations();
  case QuantumState::Kind::mixed: {
    if (state.dim() > kErgotropyDenseCap) {
      throw CapacityError("mixed-state ergotropy is limited to dimension " + std::to_string(kErgotropyDenseCap));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(state.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("density-matrix eigensolve failed");
    RVector ev = es.eigenvalues();
    if (ev(0) < -kPsdSlack) {
      throw ArgumentError("density matrix is not positive semidefinite (eigenvalue " + std::to_string(ev(0)) + ")");
    }
    return ev;
  }
  }
  return {};
}

} // namespace

ReferenceSpectrum::ReferenceSpectrum(const ManyBodyOperator &H0) : H0_(H0) {
  if (!H0.hermitian()) throw ContractViolation("reference Hamiltonian must be Hermitian");
  diagonal_ = H0.is_diagonal();
  if (diagonal_) {
    diag_ = H0.real_diagonal();
    sorted_ = sorted_copy(diag_, false);
  } else {
    sorted_ = dense_eigenvalues(H0);
  }
}

double internal_energy(const QuantumState &state, const ReferenceSpectrum &spectrum) {
  require_dim(state, spectrum.hamiltonian().dim());
  if (spectrum.is_diagonal()) return state.expectation_diagonal(spectrum.diagonal_energies());
  return state.expectation(spectrum.hamiltonian()).real();
}

double internal_energy(const QuantumState &state, const ManyBodyOperator &H0) {
  require_dim(state, H0.dim());
  if (H0.is_diagonal()) return state.expectation_diagonal(H0.real_diagonal());
  return state.expectation(H0).real();
}

PassiveDecomposition passive_decomposition(const RVector &probabilities, const RVector &energies_asc) {
  if (probabilities.size() != energies_asc.size()) throw ArgumentError("spectrum lengths differ");
  PassiveDecomposition d;
  d.eigenvalues_desc = sorted_copy(probabilities, true);
  d.energies_asc = energies_asc;
  d.passive_energy = d.eigenvalues_desc.dot(d.energies_asc);
  return d;
}

double passive_energy(const RVector &probabilities, const RVector &energies_asc) {
  if (probabilities.size() != energies_asc.size()) throw ArgumentError("spectrum lengths differ");
  RVector p = probabilities;
  std::sort(p.data(), p.data() + p.size(), std::greater<double>());
  return p.dot(energies_asc);
}

ErgotropyResult ergotropy(const QuantumState &state, const ReferenceSpectrum &spectrum) {
  require_dim(state, spectrum.hamiltonian().dim());
  ErgotropyResult r;
  r.decomposition = passive_decomposition(state_spectrum(state), spectrum.energies_asc());
  r.value = internal_energy(state, spectrum) - r.decomposition.passive_energy;
  return r;
}

ErgotropyResult ergotropy(const QuantumState &state, const ManyBodyOperator &H0) {
  return ergotropy(state, ReferenceSpectrum(H0));
}

double ergotropy_value(const QuantumState &state, const ReferenceSpectrum &spectrum) {
  require_dim(state, spectrum.hamiltonian().dim());
  const double e = internal_energy(state, spectrum);
  if (state.is_pure()) return e - state.vector().squaredNorm() * spectrum.ground_energy();
  return e - passive_energy(state_spectrum(state), spectrum.energies_asc());
}

QuantumState dephase_energy_basis(const QuantumState &state, const ManyBodyOperator &H0) {
  require_dim(state, H0.dim());
  if (!H0.is_diagonal()) throw ContractViolation("dephasing assumes H0 diagonal in the computational basis");
  if (state.kind() == QuantumState::Kind::diagonal) return state;
  return QuantumState::diagonal(state.populations());
}

ErgotropyReport ergotropy_split(const QuantumState &state, const ReferenceSpectrum &spectrum) {
  if (!spectrum.is_diagonal()) throw ContractViolation("ergotropy split assumes H0 diagonal");
  if (state.is_pure()) return ergotropy_split_pure(state.vector(), spectrum);
  ErgotropyReport rep;
  rep.internal_energy = internal_energy(state, spectrum);
  rep.total = rep.internal_energy - passive_energy(state_spectrum(state), spectrum.energies_asc());
  // The dephased state shares the internal energy and has the populations as spectrum.
  rep.incoherent = rep.internal_energy - passive_energy(state.populations(), spectrum.energies_asc());
  rep.coherent = rep.total - rep.incoherent;
  return rep;
}

ErgotropyReport ergotropy_split(const QuantumState &state, const ManyBodyOperator &H0) {
  return ergotropy_split(state, ReferenceSpectrum(H0));
}

ErgotropyReport ergotropy_split_pure(const CVector &psi, const ReferenceSpectrum &spectrum) {
  if (!spectrum.is_diagonal()) throw ContractViolation("ergotropy split assumes H0 diagonal");
  if (static_cast<std::size_t>(psi.size()) != spectrum.hamiltonian().dim()) throw ArgumentError("dimension mismatch");
  const RVector pops = psi.cwiseAbs2();
  ErgotropyReport rep;
  rep.internal_energy = pops.dot(spectrum.diagonal_energies());
  rep.total = rep.internal_energy - pops.sum() * spectrum.ground_energy();
  rep.incoherent = rep.internal_energy - passive_energy(pops, spectrum.energies_asc());
  rep.coherent = rep.total - rep.incoherent;
  return rep;
}

} // namespace qbatt
