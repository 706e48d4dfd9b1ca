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

#include "qbatt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "krylov.hpp"
#include "qbatt/errors.hpp"

namespace qbatt {

DecayRates rates_from_times(double T1, double T2) {
  if (!(T1 > 0.0) || !(T2 > 0.0)) throw ArgumentError("T1 and T2 must be positive");
  if (T2 > 2.0 * T1) {
    throw ArgumentError("T2 = " + std::to_string(T2) + " exceeds 2*T1 = " + std::to_string(2.0 * T1) +
                        "; clamp T2 to 2*T1 for relaxation-limited coherence");
  }
  DecayRates r;
  r.gamma_minus = std::isinf(T1) ? 0.0 : 1.0 / T1;
  const double inv_t2 = std::isinf(T2) ? 0.0 : 1.0 / T2;
  r.gamma_z = std::max(0.0, inv_t2 - 0.5 * r.gamma_minus);
  return r;
}

LindbladSpec LindbladSpec::closed(int n_cells) { return uniform(n_cells, 0.0, 0.0); }

LindbladSpec LindbladSpec::uniform(int n_cells, double gamma_minus, double gamma_z) {
  LindbladSpec s;
  s.gamma_minus.assign(static_cast<std::size_t>(n_cells), gamma_minus);
  s.gamma_z.assign(static_cast<std::size_t>(n_cells), gamma_z);
  s.validate(n_cells);
  return s;
}

LindbladSpec LindbladSpec::from_rates(const std::vector<DecayRates> &rates) {
  LindbladSpec s;
  for (const auto &r : rates) {
    s.gamma_minus.push_back(r.gamma_minus);
    s.gamma_z.push_back(r.gamma_z);
  }
  return s;
}

void LindbladSpec::validate(int n_cells) const {
  if (gamma_minus.size() != static_cast<std::size_t>(n_cells) || gamma_z.size() != static_cast<std::size_t>(n_cells)) {
    throw ArgumentError("Lindblad rates must have one entry per cell");
  }
  for (double r : gamma_minus) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("relaxation rates must be finite and >= 0");
  }
  for (double r : gamma_z) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("dephasing rates must be finite and >= 0");
  }
}

bool LindbladSpec::is_closed() const {
  return std::all_of(gamma_minus.begin(), gamma_minus.end(), [](double r) { return r == 0.0; }) &&
         std::all_of(gamma_z.begin(), gamma_z.end(), [](double r) { return r == 0.0; });
}

void ChargingTrace::validate() const {
  if (times.size() != states.size()) throw ArgumentError("trace times and states differ in length");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ArgumentError("trace times must be strictly increasing");
    if (states[i].dim() != states[0].dim()) throw ArgumentError("trace states differ in dimension");
  }
}

std::vector<double> uniform_grid(double t_max, double step, double t0) {
  if (!(step > 0.0) || !(t_max >= t0)) throw ArgumentError("invalid time grid");
  const auto n = static_cast<std::size_t>(std::floor((t_max - t0) / step + 1e-9));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = t0 + static_cast<double>(i) * step;
  return grid;
}

namespace {

void check_grid(const std::vector<double> &times) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ArgumentError("time grid must be strictly increasing");
  }
}

template <class Apply>
void run_unitary(Apply apply, std::size_t dim, const CVector &psi0, const std::vector<double> &times,
                 const PureObserver &observer, const UnitaryOptions &opts) {
  if (static_cast<std::size_t>(psi0.size()) != dim) throw ArgumentError("state and Hamiltonian dimensions differ");
  check_grid(times);
  if (times.empty()) return;
  CVector psi = psi0;
  detail::KrylovPropagator<Apply> prop(std::move(apply), dim, opts.tolerance, opts.max_subspace);
  if (!observer(0, times[0], psi)) return;
  for (std::size_t i = 1; i < times.size(); ++i) {
    prop.advance(psi, times[i] - times[i - 1]);
    if (!observer(i, times[i], psi)) return;
  }
}

} // namespace

void evolve_unitary(const ManyBodyOperator &V, const CVector &psi0, const std::vector<double> &times,
                    const PureObserver &observer, const UnitaryOptions &opts) {
  if (!V.hermitian()) throw ContractViolation("unitary evolution requires a Hermitian generator");
  auto apply = [&V](const CVector &x, CVector &y) { y.noalias() = V.matrix() * x; };
  run_unitary(apply, V.dim(), psi0, times, observer, opts);
}

void evolve_unitary(const LocalTermSum &V, const CVector &psi0, const std::vector<double> &times,
                    const PureObserver &observer, const UnitaryOptions &opts) {
  if (!V.hermitian()) throw ContractViolation("unitary evolution requires a Hermitian generator");
  auto apply = [&V](const CVector &x, CVector &y) { V.apply_into(x, y); };
  run_unitary(apply, V.dim(), psi0, times, observer, opts);
}

ChargingTrace evolve_unitary(const ManyBodyOperator &V, const QuantumState &psi0, const std::vector<double> &times,
                             const UnitaryOptions &opts) {
  ChargingTrace trace;
  evolve_unitary(
      V, psi0.vector(), times,
      [&](std::size_t, double t, const CVector &psi) {
        trace.times.push_back(t);
        trace.states.push_back(QuantumState::pure(psi / psi.norm()));
        return true;
      },
      opts);
  return trace;
}

// ---------------------------------------------------------------------------
// Lindblad

namespace {

// Precomputed elementwise structure of the dissipator.
struct Dissipator {
  Eigen::MatrixXd decay;            // -(a_i + a_j)/2 - w[i ^ j]
  std::vector<std::size_t> jump_masks;
  std::vector<double> jump_rates;

  Dissipator(const LindbladSpec &spec, int n_cells) {
    const std::size_t dim = basis_dim(n_cells);
    RVector a = RVector::Zero(static_cast<Eigen::Index>(dim));
    RVector w = RVector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
      for (int n = 0; n < n_cells; ++n) {
        if (bit_of(b, n)) {
          a(static_cast<Eigen::Index>(b)) += spec.gamma_minus[static_cast<std::size_t>(n)];
          w(static_cast<Eigen::Index>(b)) += spec.gamma_z[static_cast<std::size_t>(n)];
        }
      }
    }
    const auto d = static_cast<Eigen::Index>(dim);
    decay.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        decay(i, j) = -0.5 * (a(i) + a(j)) - w(static_cast<Eigen::Index>(static_cast<std::size_t>(i) ^ static_cast<std::size_t>(j)));
      }
    }
    for (int n = 0; n < n_cells; ++n) {
      if (spec.gamma_minus[static_cast<std::size_t>(n)] > 0.0) {
        jump_masks.push_back(std::size_t{1} << n);
        jump_rates.push_back(spec.gamma_minus[static_cast<std::size_t>(n)]);
      }
    }
  }

  // out += D[rho]
  void add_to(const CMatrix &rho, CMatrix &out) const {
    out.array() += decay.array() * rho.array();
    const auto d = rho.rows();
    for (std::size_t k = 0; k < jump_masks.size(); ++k) {
      const std::size_t m = jump_masks[k];
      const double g = jump_rates[k];
      for (Eigen::Index j = 0; j < d; ++j) {
        if (static_cast<std::size_t>(j) & m) continue;
        const auto jm = static_cast<Eigen::Index>(static_cast<std::size_t>(j) | m);
        for (Eigen::Index i = 0; i < d; ++i) {
          if (static_cast<std::size_t>(i) & m) continue;
          out(i, j) += g * rho(static_cast<Eigen::Index>(static_cast<std::size_t>(i) | m), jm);
        }
      }
    }
  }
};

void check_lindblad_inputs(const ManyBodyOperator &H, const LindbladSpec &spec, std::size_t rho_dim,
                           std::size_t max_dim) {
  if (!H.hermitian()) throw ContractViolation("Lindblad evolution requires a Hermitian Hamiltonian");
  if (H.dim() != rho_dim) throw ArgumentError("state and Hamiltonian dimensions differ");
  if (H.dim() > max_dim) {
    throw CapacityError("Lindblad dimension " + std::to_string(H.dim()) + " exceeds cap " + std::to_string(max_dim));
  }
  spec.validate(H.n_sites());
}

} // namespace

CMatrix lindblad_rhs(const ManyBodyOperator &H, const LindbladSpec &spec, const CMatrix &rho) {
  check_lindblad_inputs(H, spec, static_cast<std::size_t>(rho.rows()), std::numeric_limits<std::size_t>::max());
  const Dissipator diss(spec, H.n_sites());
  CMatrix A = H.matrix() * rho;
  CMatrix out = cd(0.0, -1.0) * (A - rho * H.to_dense());
  diss.add_to(rho, out);
  return out;
}

CMatrix liouvillian_matrix(const ManyBodyOperator &H, const LindbladSpec &spec) {
  // Built column by column from the elementwise right-hand side on basis matrices.
  const auto d = static_cast<Eigen::Index>(H.dim());
  CMatrix L = CMatrix::Zero(d * d, d * d);
  const Dissipator diss(spec, H.n_sites());
  const CMatrix Hd = H.to_dense();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      CMatrix E = CMatrix::Zero(d, d);
      E(i, j) = 1.0;
      CMatrix out = cd(0.0, -1.0) * (Hd * E - E * Hd);
      diss.add_to(E, out);
      L.col(j * d + i) = Eigen::Map<const CVector>(out.data(), d * d);
    }
  }
  return L;
}

LindbladDiagnostics evolve_lindblad(const ManyBodyOperator &H, const LindbladSpec &spec, const CMatrix &rho0,
                                    const std::vector<double> &times, const MixedObserver &observer,
                                    const LindbladOptions &opts) {
  if (rho0.rows() != rho0.cols()) throw ArgumentError("density matrix must be square");
  check_lindblad_inputs(H, spec, static_cast<std::size_t>(rho0.rows()), opts.max_dim);
  const Dissipator diss(spec, H.n_sites());
  const SparseMatrix &Hm = H.matrix();
  CMatrix A(rho0.rows(), rho0.cols());

  // d rho / dt = -i (H rho - rho H) + D[rho]; stage inputs stay Hermitian, so rho H = (H rho)^dagger.
  auto rhs = [&](double, const CMatrix &rho, CMatrix &drho) {
    A.noalias() = Hm * rho;
    drho = cd(0.0, -1.0) * (A - A.adjoint());
    diss.add_to(rho, drho);
  };

  LindbladDiagnostics diag;
  auto watch = [&](std::size_t i, double t, const CMatrix &rho) {
    const double tr_err = std::abs(rho.trace().real() - 1.0);
    diag.max_trace_error = std::max(diag.max_trace_error, tr_err);
    diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (tr_err > opts.trace_tolerance) {
      throw InvariantViolation("Lindblad trace drifted by " + std::to_string(tr_err) + " at t = " + std::to_string(t));
    }
    if (opts.check_positivity) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
      diag.min_eigenvalue = std::min(diag.min_eigenvalue, es.eigenvalues()(0));
    }
    return observer(i, t, rho);
  };
  diag.stats = dopri5(rhs, rho0, times, watch, opts.ode);
  return diag;
}

ChargingTrace evolve_lindblad(const ManyBodyOperator &H, const LindbladSpec &spec, const QuantumState &rho0,
                              const std::vector<double> &times, const LindbladOptions &opts,
                              LindbladDiagnostics *diagnostics) {
  ChargingTrace trace;
  auto d = evolve_lindblad(
      H, spec, rho0.density(), times,
      [&](std::size_t, double t, const CMatrix &rho) {
        trace.times.push_back(t);
        // Symmetrize away roundoff so downstream Hermitian solvers see exact input.
        trace.states.push_back(QuantumState::unchecked_mixed(0.5 * (rho + rho.adjoint())));
        return true;
      },
      opts);
  if (diagnostics) *diagnostics = d;
  return trace;
}

// ---------------------------------------------------------------------------
// Product states

ProductState product_ground(int n_cells) {
  basis_dim(n_cells);
  return ProductState(static_cast<std::size_t>(n_cells), Eigen::Vector2cd(1.0, 0.0));
}

CVector product_to_vector(const ProductState &cells) {
  const int n = static_cast<int>(cells.size());
  const std::size_t dim = basis_dim(n);
  CVector psi(static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < dim; ++b) {
    cd amp(1.0, 0.0);
    for (int k = 0; k < n; ++k) amp *= cells[static_cast<std::size_t>(k)](bit_of(b, k));
    psi(static_cast<Eigen::Index>(b)) = amp;
  }
  return psi;
}

void evolve_product(const LocalTermSum &V, const ProductState &cells0, const std::vector<double> &times,
                    const ProductObserver &observer) {
  if (!V.pairs().empty()) throw ArgumentError("product evolution needs single-cell terms only");
  if (!V.hermitian()) throw ContractViolation("product evolution requires Hermitian terms");
  if (cells0.size() != static_cast<std::size_t>(V.n_sites())) throw ArgumentError("product state size mismatch");
  check_grid(times);
  // Each cell evolves under its own 2x2 generator; propagators are formed at the
  // absolute time so no error accumulates along the grid.
  std::vector<Eigen::Vector2d> vals(cells0.size(), Eigen::Vector2d::Zero());
  std::vector<Eigen::Matrix2cd> evecs(cells0.size(), Eigen::Matrix2cd::Identity());
  for (const auto &[site, h] : V.singles()) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    vals[static_cast<std::size_t>(site)] = es.eigenvalues();
    evecs[static_cast<std::size_t>(site)] = es.eigenvectors();
  }
  ProductState cells = cells0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - times[0];
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const Eigen::Vector2cd phase(std::exp(cd(0.0, -vals[k](0) * dt)), std::exp(cd(0.0, -vals[k](1) * dt)));
      cells[k] = evecs[k] * phase.asDiagonal() * evecs[k].adjoint() * cells0[k];
    }
    if (!observer(i, times[i], cells)) return;
  }
}

} // namespace qbatt
