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

#include <functional>
#include <optional>
#include <vector>

#include "qbatt/battery.hpp"
#include "qbatt/ode.hpp"
#include "qbatt/operators.hpp"
#include "qbatt/state.hpp"

namespace qbatt {

struct DecayRates {
  double gamma_minus = 0.0; // 1 / T1
  double gamma_z = 0.0;     // pure dephasing: 1 / T2 - 1 / (2 T1)
};

// Infinite times are allowed and mean "no decay". Requires T2 <= 2 T1.
DecayRates rates_from_times(double T1, double T2);

// Relaxation channel sigma_minus at rate gamma_minus[n]; dephasing channel
// n_n = sigma_plus sigma_minus at rate 2 * gamma_z[n], so a single-cell
// coherence decays as exp(-gamma_z t).
struct LindbladSpec {
  std::vector<double> gamma_minus;
  std::vector<double> gamma_z;

  static LindbladSpec closed(int n_cells);
  static LindbladSpec uniform(int n_cells, double gamma_minus, double gamma_z);
  static LindbladSpec from_rates(const std::vector<DecayRates> &rates);
  void validate(int n_cells) const;
  bool is_closed() const;
};

struct ChargingTrace {
  std::vector<double> times;
  std::vector<QuantumState> states;
  std::optional<ChargingKind> kind;
  std::optional<BatteryParams> params;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

// Return false to stop the evolution after the current grid point.
using PureObserver = std::function<bool(std::size_t index, double t, const CVector &psi)>;
using MixedObserver = std::function<bool(std::size_t index, double t, const CMatrix &rho)>;
using ProductState = std::vector<Eigen::Vector2cd>;
using ProductObserver = std::function<bool(std::size_t index, double t, const ProductState &cells)>;

struct UnitaryOptions {
  double tolerance = 1e-12; // per Krylov step, in the 2-norm
  int max_subspace = 24;
};

// |psi(t)> = exp(-i V t)|psi0> on each grid point, starting from times[0].
void evolve_unitary(const ManyBodyOperator &V, const CVector &psi0, const std::vector<double> &times,
                    const PureObserver &observer, const UnitaryOptions &opts = {});
void evolve_unitary(const LocalTermSum &V, const CVector &psi0, const std::vector<double> &times,
                    const PureObserver &observer, const UnitaryOptions &opts = {});
ChargingTrace evolve_unitary(const ManyBodyOperator &V, const QuantumState &psi0, const std::vector<double> &times,
                             const UnitaryOptions &opts = {});

struct LindbladOptions {
  OdeOptions ode;
  std::size_t max_dim = 1024;
  // Eigendecompose rho at every grid point to report the most negative eigenvalue.
  bool check_positivity = false;
  double trace_tolerance = 1e-7;
};

struct LindbladDiagnostics {
  OdeStats stats;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0; // only when check_positivity
};

LindbladDiagnostics evolve_lindblad(const ManyBodyOperator &H, const LindbladSpec &spec, const CMatrix &rho0,
                                    const std::vector<double> &times, const MixedObserver &observer,
                                    const LindbladOptions &opts = {});
// Pure inputs are promoted to density matrices.
ChargingTrace evolve_lindblad(const ManyBodyOperator &H, const LindbladSpec &spec, const QuantumState &rho0,
                              const std::vector<double> &times, const LindbladOptions &opts = {},
                              LindbladDiagnostics *diagnostics = nullptr);

// Right-hand side of the master equation, exposed for oracle tests.
CMatrix lindblad_rhs(const ManyBodyOperator &H, const LindbladSpec &spec, const CMatrix &rho);
// Dense Liouvillian acting on column-stacked vec(rho); dim^2 x dim^2.
CMatrix liouvillian_matrix(const ManyBodyOperator &H, const LindbladSpec &spec);

// Exact evolution of a product state under a sum of single-cell terms.
// Throws ArgumentError when V contains pair terms.
void evolve_product(const LocalTermSum &V, const ProductState &cells0, const std::vector<double> &times,
                    const ProductObserver &observer);
ProductState product_ground(int n_cells);
CVector product_to_vector(const ProductState &cells);

// Uniform grid t0, t0 + step, ..., up to and including t_max (within 1e-9 step).
std::vector<double> uniform_grid(double t_max, double step, double t0 = 0.0);

} // namespace qbatt
