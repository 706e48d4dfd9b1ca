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

#include "qbatt/state.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qbatt/errors.hpp"

namespace qbatt {

QuantumState QuantumState::pure(CVector psi) {
  QuantumState s;
  s.dim_ = static_cast<std::size_t>(psi.size());
  sites_for_dim(s.dim_);
  const double norm2 = psi.squaredNorm();
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    throw ArgumentError("pure state is not normalized: |psi|^2 = " + std::to_string(norm2));
  }
  s.kind_ = Kind::pure;
  s.psi_ = std::move(psi);
  return s;
}

QuantumState QuantumState::unchecked_mixed(CMatrix rho) {
  QuantumState s;
  if (rho.rows() != rho.cols()) throw ArgumentError("density matrix must be square");
  s.dim_ = static_cast<std::size_t>(rho.rows());
  sites_for_dim(s.dim_);
  s.kind_ = Kind::mixed;
  s.rho_ = std::move(rho);
  return s;
}

QuantumState QuantumState::mixed(CMatrix rho, double psd_slack) {
  QuantumState s = unchecked_mixed(std::move(rho));
  const double tr = s.rho_.trace().real();
  if (std::abs(tr - 1.0) > kNormTolerance) throw ArgumentError("density matrix trace is " + std::to_string(tr));
  const double herm = (s.rho_ - s.rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTolerance) throw ArgumentError("density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(s.rho_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()(0) < -psd_slack) {
    throw ArgumentError("density matrix has eigenvalue " + std::to_string(solver.eigenvalues()(0)));
  }
  return s;
}

QuantumState QuantumState::diagonal(RVector populations) {
  QuantumState s;
  s.dim_ = static_cast<std::size_t>(populations.size());
  sites_for_dim(s.dim_);
  if (std::abs(populations.sum() - 1.0) > kNormTolerance) throw ArgumentError("populations do not sum to 1");
  if (populations.minCoeff() < -kNormTolerance) throw ArgumentError("negative population");
  s.kind_ = Kind::diagonal;
  s.diag_ = std::move(populations);
  return s;
}

QuantumState QuantumState::basis_state(int n_sites, std::size_t index) {
  const std::size_t dim = basis_dim(n_sites);
  if (index >= dim) throw ArgumentError("basis index out of range");
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(dim));
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return pure(std::move(psi));
}

QuantumState QuantumState::maximally_mixed(int n_sites) {
  const std::size_t dim = basis_dim(n_sites);
  return diagonal(RVector::Constant(static_cast<Eigen::Index>(dim), 1.0 / static_cast<double>(dim)));
}

const CVector &QuantumState::vector() const {
  if (kind_ != Kind::pure) throw ArgumentError("state is not pure");
  return psi_;
}

const CMatrix &QuantumState::matrix() const {
  if (kind_ != Kind::mixed) throw ArgumentError("state is not a dense density matrix");
  return rho_;
}

const RVector &QuantumState::diagonal_populations() const {
  if (kind_ != Kind::diagonal) throw ArgumentError("state is not diagonal");
  return diag_;
}

CMatrix QuantumState::density() const {
  switch (kind_) {
  case Kind::pure:
    return psi_ * psi_.adjoint();
  case Kind::mixed:
    return rho_;
  case Kind::diagonal:
    return diag_.cast<cd>().asDiagonal();
  }
  return {};
}

RVector QuantumState::populations() const {
  switch (kind_) {
  case Kind::pure:
    return psi_.cwiseAbs2();
  case Kind::mixed:
    return rho_.diagonal().real();
  case Kind::diagonal:
    return diag_;
  }
  return {};
}

cd QuantumState::expectation(const ManyBodyOperator &op) const {
  if (op.dim() != dim_) throw ArgumentError("operator and state dimensions differ");
  switch (kind_) {
  case Kind::pure:
    return psi_.dot(op.apply(psi_));
  case Kind::mixed: {
    // tr(rho A) = sum_ij A_ij rho_ji
    cd acc(0.0, 0.0);
    for (const auto &[r, c, v] : op.entries()) {
      acc += v * rho_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    }
    return acc;
  }
  case Kind::diagonal: {
    cd acc(0.0, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) acc += op.coeff(i, i) * diag_(static_cast<Eigen::Index>(i));
    return acc;
  }
  }
  return {};
}

double QuantumState::expectation_diagonal(const RVector &d) const {
  if (static_cast<std::size_t>(d.size()) != dim_) throw ArgumentError("diagonal observable dimension mismatch");
  return populations().dot(d);
}

double QuantumState::trace() const {
  switch (kind_) {
  case Kind::pure:
    return psi_.squaredNorm();
  case Kind::mixed:
    return rho_.trace().real();
  case Kind::diagonal:
    return diag_.sum();
  }
  return 0.0;
}

} // namespace qbatt
