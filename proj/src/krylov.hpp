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

// Lanczos machinery shared by the eigensolver and the propagator. Internal.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qbatt/errors.hpp"
#include "qbatt/operators.hpp"

namespace qbatt::detail {

// Reorthogonalize w against basis[0..count) twice (classical Gram-Schmidt).
inline void reorthogonalize(const std::vector<CVector> &basis, std::size_t count, CVector &w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < count; ++k) {
      w.noalias() -= basis[k] * basis[k].dot(w);
    }
  }
}

// Extremal eigenvalues of a Hermitian operator given only its action.
template <class Apply>
SpectralRange lanczos_range(Apply &&apply, std::size_t dim, const SpectralOptions &opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  CVector q(static_cast<Eigen::Index>(dim));
  for (auto &z : q) z = cd(normal(rng), normal(rng));
  q.normalize();

  const std::size_t max_iter = std::min<std::size_t>(dim, 600);
  std::vector<CVector> basis;
  std::vector<double> alpha, beta;
  basis.push_back(q);
  CVector w(q.size());

  SpectralRange out;
  for (std::size_t j = 0; j < max_iter; ++j) {
    apply(basis[j], w);
    const double a = basis[j].dot(w).real();
    alpha.push_back(a);
    reorthogonalize(basis, basis.size(), w);
    const double b = w.norm();

    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    RVector diag = Eigen::Map<const RVector>(alpha.data(), m);
    RVector sub = m > 1 ? RVector(Eigen::Map<const RVector>(beta.data(), m - 1)) : RVector();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto &theta = tri.eigenvalues();
    const auto &s = tri.eigenvectors();
    out.min = theta(0);
    out.max = theta(m - 1);
    const double scale = std::max({1.0, std::abs(out.min), std::abs(out.max)});
    const double res_min = b * std::abs(s(m - 1, 0));
    const double res_max = b * std::abs(s(m - 1, m - 1));
    const bool exhausted = b <= 1e-13 * scale;
    if (exhausted || (m >= 4 && res_min <= opts.tolerance * scale && res_max <= opts.tolerance * scale)) {
      return out;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  if (max_iter == dim) return out;
  throw Error("Lanczos eigensolver did not converge within " + std::to_string(max_iter) + " iterations");
}

// Advances psi <- exp(-i H tau) psi for Hermitian H with an adaptive Krylov
// subspace. The a-posteriori estimate beta_m |[exp(-i tau T) e1]_m| bounds the
// per-step error; tau is subdivided when the subspace cap is reached.
template <class Apply>
class KrylovPropagator {
public:
  KrylovPropagator(Apply apply, std::size_t dim, double tolerance = 1e-12, int max_subspace = 24)
      : apply_(std::move(apply)), tol_(tolerance), m_max_(max_subspace) {
    basis_.reserve(static_cast<std::size_t>(m_max_) + 1);
    w_.resize(static_cast<Eigen::Index>(dim));
  }

  void advance(CVector &psi, double tau) {
    double remaining = tau;
    double step = tau;
    if (last_step_ > 0.0) step = std::min(step, 2.0 * last_step_);
    while (remaining > 0.0) {
      step = std::min(step, remaining);
      // Avoid leaving a sliver that would cost a full Krylov build.
      if (remaining - step < 1e-12 * tau) step = remaining;
      if (try_step(psi, step)) {
        remaining -= step;
        last_step_ = step;
      } else {
        step *= 0.5;
        if (step < 1e-14 * std::max(1.0, tau)) {
          throw IntegrationError("Krylov propagator step underflow");
        }
      }
    }
  }

private:
  bool try_step(CVector &psi, double tau) {
    const double nrm = psi.norm();
    if (nrm == 0.0) return true;
    basis_.clear();
    basis_.push_back(psi / nrm);
    std::vector<double> alpha, beta;
    for (int j = 0; j < m_max_; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      apply_(basis_[uj], w_);
      // Three-term recurrence plus one local correction pass; short subspaces
      // do not lose enough orthogonality to need the full sweep.
      const double a = basis_[uj].dot(w_).real();
      w_ -= a * basis_[uj];
      if (j > 0) w_ -= beta.back() * basis_[uj - 1];
      const std::size_t first = uj > 0 ? uj - 1 : 0;
      for (std::size_t k = first; k <= uj; ++k) w_.noalias() -= basis_[k] * basis_[k].dot(w_);
      alpha.push_back(a);
      const double b = w_.norm();
      const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
      Eigen::VectorXcd y = small_exponential(alpha, beta, tau);
      const bool invariant = b <= 1e-14 * (std::abs(alpha.back()) + 1.0);
      const double err = invariant ? 0.0 : b * std::abs(y(m - 1));
      if (err <= tol_ && (m >= 2 || invariant)) {
        CVector out = CVector::Zero(psi.size());
        for (Eigen::Index k = 0; k < m; ++k) out.noalias() += y(k) * basis_[static_cast<std::size_t>(k)];
        psi = nrm * out;
        return true;
      }
      if (j + 1 == m_max_) break;
      beta.push_back(b);
      basis_.push_back(w_ / b);
    }
    return false;
  }

  static Eigen::VectorXcd small_exponential(const std::vector<double> &alpha, const std::vector<double> &beta,
                                            double tau) {
    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    if (m == 1) {
      Eigen::VectorXcd y(1);
      y(0) = std::exp(cd(0.0, -tau * alpha[0]));
      return y;
    }
    RVector diag = Eigen::Map<const RVector>(alpha.data(), m);
    RVector sub = Eigen::Map<const RVector>(beta.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto &theta = tri.eigenvalues();
    const auto &s = tri.eigenvectors();
    Eigen::VectorXcd phase(m);
    for (Eigen::Index k = 0; k < m; ++k) phase(k) = std::exp(cd(0.0, -tau * theta(k))) * s(0, k);
    return s.cast<cd>() * phase;
  }

  Apply apply_;
  double tol_;
  int m_max_;
  double last_step_ = 0.0;
  std::vector<CVector> basis_;
  CVector w_;
};

} // namespace qbatt::detail
