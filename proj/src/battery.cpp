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

#include "qbatt/battery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qbatt/errors.hpp"

namespace qbatt {

BatteryParams BatteryParams::uniform(int n_cells, double omega0, double g, double alpha) {
  BatteryParams p;
  p.n_cells = n_cells;
  p.omega.assign(static_cast<std::size_t>(std::max(n_cells, 0)), omega0);
  p.g.assign(static_cast<std::size_t>(std::max(n_cells - 1, 0)), g);
  p.Omega = alpha * g;
  p.alpha = alpha;
  p.validate();
  return p;
}

BatteryParams BatteryParams::with_bonds(std::vector<double> omega, std::vector<double> g, double alpha) {
  BatteryParams p;
  p.n_cells = static_cast<int>(omega.size());
  p.omega = std::move(omega);
  p.g = std::move(g);
  if (p.n_cells < 2) throw ArgumentError("per-bond parameters need at least two cells");
  p.alpha = alpha;
  p.Omega = alpha * p.mean_g();
  p.validate();
  return p;
}

void BatteryParams::validate() const {
  if (n_cells < 1 || n_cells > kMaxSites) throw ArgumentError("n_cells must lie in [1, 30]");
  if (omega.size() != static_cast<std::size_t>(n_cells)) throw ArgumentError("omega must have one entry per cell");
  for (double w : omega) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("cell frequencies must be positive and finite");
  }
  if (g.size() != static_cast<std::size_t>(n_cells - 1)) throw ArgumentError("g must have n_cells - 1 entries");
  for (double x : g) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ArgumentError("bond couplings must be positive and finite");
  }
  if (!(Omega >= 0.0) || !std::isfinite(Omega)) throw ArgumentError("Omega must be nonnegative and finite");
}

double BatteryParams::mean_g() const {
  if (g.empty()) throw ArgumentError("a single cell has no bonds");
  return std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
}

double BatteryParams::omega0() const {
  return std::accumulate(omega.begin(), omega.end(), 0.0) / static_cast<double>(omega.size());
}

double BatteryParams::max_energy() const { return std::accumulate(omega.begin(), omega.end(), 0.0); }

std::string to_string(ChargingKind kind) { return kind == ChargingKind::classical ? "classical" : "quantum"; }

ChargingKind charging_kind_from_string(const std::string &name) {
  if (name == "classical" || name == "cl") return ChargingKind::classical;
  if (name == "quantum" || name == "qu") return ChargingKind::quantum;
  throw ArgumentError("unknown charging kind '" + name + "'");
}

RVector energy_levels(const BatteryParams &p) {
  p.validate();
  const std::size_t dim = basis_dim(p.n_cells);
  RVector e(static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < dim; ++b) {
    double s = 0.0;
    for (int n = 0; n < p.n_cells; ++n) {
      if (bit_of(b, n)) s += p.omega[static_cast<std::size_t>(n)];
    }
    e(static_cast<Eigen::Index>(b)) = s;
  }
  return e;
}

ManyBodyOperator build_H0(const BatteryParams &p) { return ManyBodyOperator::diagonal(energy_levels(p)); }

ManyBodyOperator build_Vcl(const BatteryParams &p) { return chain_Vcl(p).to_operator(); }

ManyBodyOperator build_Vqu(const BatteryParams &p) { return chain_Vqu(p).to_operator(); }

ManyBodyOperator build_V(const BatteryParams &p, ChargingKind kind) {
  return kind == ChargingKind::classical ? build_Vcl(p) : build_Vqu(p);
}

LocalTermSum chain_Vcl(const BatteryParams &p) {
  p.validate();
  LocalTermSum v(p.n_cells);
  for (int n = 0; n < p.n_cells; ++n) v.add_single(p.Omega * pauli_x(), n);
  return v;
}

LocalTermSum chain_Vqu(const BatteryParams &p) {
  p.validate();
  if (p.n_cells < 2) throw ArgumentError("quantum charging needs at least two cells");
  LocalTermSum v(p.n_cells);
  const Local4 raise = kron_sites(sigma_plus(), sigma_plus());
  const Local4 lower = kron_sites(sigma_minus(), sigma_minus());
  for (int n = 0; n + 1 < p.n_cells; ++n) v.add_pair(p.g[static_cast<std::size_t>(n)] * (raise + lower), n, n + 1);
  return v;
}

LocalTermSum chain_V(const BatteryParams &p, ChargingKind kind) {
  return kind == ChargingKind::classical ? chain_Vcl(p) : chain_Vqu(p);
}

DrivingPotential driving_potential(const ManyBodyOperator &V, ChargingKind kind, const SpectralOptions &opts) {
  const SpectralRange r = spectral_range(V, opts);
  return {r.spread(), r.min, r.max, kind};
}

DrivingPotential driving_potential(const LocalTermSum &V, ChargingKind kind, const SpectralOptions &opts) {
  const SpectralRange r = spectral_range(V, opts);
  return {r.spread(), r.min, r.max, kind};
}

double eta(const BatteryParams &p, const SpectralOptions &opts) {
  if (p.n_cells < 2) throw ArgumentError("eta needs at least two cells");
  const double v_cl = driving_potential(chain_Vcl(p), ChargingKind::classical, opts).v_dv;
  const double v_qu = driving_potential(chain_Vqu(p), ChargingKind::quantum, opts).v_dv;
  if (v_qu <= 0.0) throw DegenerateInputError("quantum driving potential is zero");
  return v_cl / v_qu - 1.0;
}

double fair_alpha(int n_cells, const SpectralOptions &opts) {
  // eta = 2 N alpha g / v_qu - 1 vanishes at alpha = v_qu(g = 1) / (2 N).
  const BatteryParams unit = BatteryParams::uniform(n_cells, 1.0, 1.0, 0.0);
  const double v_qu = driving_potential(chain_Vqu(unit), ChargingKind::quantum, opts).v_dv;
  return v_qu / (2.0 * n_cells);
}

ManyBodyOperator power_operator(const ManyBodyOperator &H0, const ManyBodyOperator &V) {
  if (!H0.hermitian() || !V.hermitian()) throw ContractViolation("power_operator requires Hermitian inputs");
  return commutator(H0, V) * cd(0.0, -1.0);
}

double power_bound(int k, double omega0, double v_dv) {
  if (k != 1 && k != 2) throw ArgumentError("partition size must be 1 or 2");
  return 0.5 * k * omega0 * v_dv;
}

int partition_size(ChargingKind kind) { return kind == ChargingKind::classical ? 1 : 2; }

} // namespace qbatt
