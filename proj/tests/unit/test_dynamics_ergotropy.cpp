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

#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qbatt/battery.hpp"
#include "qbatt/dynamics.hpp"
#include "qbatt/ergotropy.hpp"
#include "qbatt/errors.hpp"

using namespace qbatt;

namespace {

// Oracle jump set for a LindbladSpec: sigma_minus at gamma_minus, n at 2 gamma_z.
std::vector<std::pair<double, oracle::Mat>> oracle_jumps(int n, const LindbladSpec &spec) {
  std::vector<std::pair<double, oracle::Mat>> jumps;
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    jumps.emplace_back(spec.gamma_minus[i], oracle::on_sites(n, {{k, oracle::sm()}}));
    jumps.emplace_back(2.0 * spec.gamma_z[i], oracle::on_sites(n, {{k, oracle::nop()}}));
  }
  return jumps;
}

} // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("time grids") {
    const auto g = uniform_grid(1.0, 0.1);
    REQUIRE(g.size() == 11);
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK_THROWS_AS(uniform_grid(1.0, 0.0), ArgumentError);
    const auto r = rates_from_times(20.0, 10.0);
    CHECK(r.gamma_minus == doctest::Approx(0.05));
    CHECK(r.gamma_z == doctest::Approx(0.1 - 0.025));
    CHECK_THROWS_AS(rates_from_times(10.0, 25.0), ArgumentError);
  }

  TEST_CASE("Krylov propagation matches the matrix exponential") {
    std::mt19937_64 rng(11);
    for (int n : {2, 4, 6}) {
      const auto p = BatteryParams::uniform(n, 1.0, 1.3, 0.6);
      for (auto kind : {ChargingKind::classical, ChargingKind::quantum}) {
        const CMatrix H = build_V(p, kind).to_dense();
        const CVector psi0 = oracle::random_state(rng, 1 << n);
        const auto times = uniform_grid(2.0, 0.25);
        double worst = 0.0;
        evolve_unitary(chain_V(p, kind), psi0, times, [&](std::size_t, double t, const CVector &psi) {
          const CVector ref = (cd(0, -t) * H).exp() * psi0;
          worst = std::max(worst, (psi - ref).norm());
          return true;
        });
        CHECK(worst < 1e-9);
      }
    }
  }

  TEST_CASE("observer can stop the run") {
    const auto p = BatteryParams::uniform(2, 1.0, 1.0, 0.5);
    std::size_t seen = 0;
    evolve_unitary(chain_Vqu(p), QuantumState::ground(2).vector(), uniform_grid(1.0, 0.1),
                   [&](std::size_t i, double, const CVector &) {
                     seen = i + 1;
                     return i < 3;
                   });
    CHECK(seen == 4);
  }

  TEST_CASE("product-state evolution equals the full register") {
    const auto p = BatteryParams::uniform(5, 1.0, 1.0, 0.8);
    const auto times = uniform_grid(1.5, 0.1);
    std::vector<CVector> full;
    evolve_unitary(chain_Vcl(p), QuantumState::ground(5).vector(), times, [&](std::size_t, double, const CVector &psi) {
      full.push_back(psi);
      return true;
    });
    double worst = 0.0;
    evolve_product(chain_Vcl(p), product_ground(5), times, [&](std::size_t i, double, const ProductState &cells) {
      worst = std::max(worst, (product_to_vector(cells) - full[i]).norm());
      return true;
    });
    CHECK(worst < 1e-10);
    CHECK_THROWS(evolve_product(chain_Vqu(p), product_ground(5), times, [](auto, auto, auto &) { return true; }));
  }

  TEST_CASE("Lindblad integrator matches the vectorized generator") {
    std::mt19937_64 rng(3);
    for (int n = 1; n <= 3; ++n) {
      const auto p = BatteryParams::uniform(n, 1.0, 0.9, 0.7);
      for (auto kind : {ChargingKind::classical, ChargingKind::quantum}) {
        if (n == 1 && kind == ChargingKind::quantum) continue;
        const auto H = build_H0(p) + build_V(p, kind);
        LindbladSpec spec;
        for (int k = 0; k < n; ++k) {
          spec.gamma_minus.push_back(0.05 + 0.1 * k);
          spec.gamma_z.push_back(0.2 - 0.05 * k);
        }
        const CMatrix rho0 = oracle::random_density(rng, 1 << n, 2);
        const oracle::Mat L = oracle::liouvillian(H.to_dense(), oracle_jumps(n, spec));
        CHECK((liouvillian_matrix(H, spec) - L).cwiseAbs().maxCoeff() < 1e-13);
        double worst = 0.0;
        evolve_lindblad(H, spec, rho0, uniform_grid(3.0, 0.5), [&](std::size_t, double t, const CMatrix &rho) {
          worst = std::max(worst, (rho - oracle::evolve_liouvillian(L, rho0, t)).cwiseAbs().maxCoeff());
          return true;
        });
        CHECK(worst < 1e-6);
      }
    }
  }

  TEST_CASE("amplitude damping and dephasing of one cell") {
    const double gm = 0.37, gz = 0.21;
    const auto H = ManyBodyOperator::zero(2);
    CMatrix rho0(2, 2);
    rho0 << 0.5, 0.5, 0.5, 0.5;
    const auto spec = LindbladSpec::uniform(1, gm, gz);
    double worst_p = 0.0, worst_c = 0.0;
    evolve_lindblad(H, spec, rho0, uniform_grid(5.0, 0.25), [&](std::size_t, double t, const CMatrix &rho) {
      worst_p = std::max(worst_p, std::abs(rho(1, 1).real() - 0.5 * std::exp(-gm * t)));
      worst_c = std::max(worst_c, std::abs(std::abs(rho(0, 1)) - 0.5 * std::exp(-(0.5 * gm + gz) * t)));
      return true;
    });
    CHECK(worst_p < 1e-8);
    CHECK(worst_c < 1e-8);
  }

  TEST_CASE("Lindblad evolution preserves trace and hermiticity") {
    const auto p = BatteryParams::uniform(4, 1.0, 1.0, 0.6);
    LindbladDiagnostics diag;
    LindbladOptions opts;
    opts.check_positivity = true;
    const auto trace = evolve_lindblad(build_H0(p) + build_Vqu(p), LindbladSpec::uniform(4, 0.1, 0.3),
                                       QuantumState::ground(4), uniform_grid(2.0, 0.1), opts, &diag);
    CHECK(trace.size() == 21);
    CHECK(diag.max_trace_error < 1e-9);
    CHECK(diag.max_hermiticity_error < 1e-12);
    CHECK(diag.min_eigenvalue > -1e-9);
  }

  TEST_CASE("Lindblad input contracts") {
    const auto p = BatteryParams::uniform(2, 1.0, 1.0, 0.6);
    CHECK_THROWS_AS(evolve_lindblad(build_Vqu(p), LindbladSpec::uniform(3, 0.1, 0.1), QuantumState::ground(2),
                                    uniform_grid(1.0, 0.1)),
                    ArgumentError);
    LindbladOptions small;
    small.max_dim = 2;
    CHECK_THROWS_AS(evolve_lindblad(build_Vqu(p), LindbladSpec::closed(2), QuantumState::ground(2),
                                    uniform_grid(1.0, 0.1), small),
                    CapacityError);
    CHECK_THROWS(LindbladSpec::uniform(2, -0.1, 0.0).validate(2));
  }
}

TEST_SUITE("ergotropy") {
  TEST_CASE("passive energy equals the exhaustive permutation minimum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int dim : {2, 3, 4}) {
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(static_cast<std::size_t>(dim)), e(static_cast<std::size_t>(dim));
        double s = 0.0;
        for (auto &x : p) s += (x = u(rng));
        for (auto &x : p) x /= s;
        for (auto &x : e) x = 3.0 * u(rng);
        std::sort(e.begin(), e.end());
        const RVector pv = Eigen::Map<RVector>(p.data(), dim);
        const RVector ev = Eigen::Map<RVector>(e.data(), dim);
        CHECK(passive_energy(pv, ev) == doctest::Approx(oracle::permutation_passive_energy(p, e)).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("pure-state ergotropy equals the internal energy") {
    std::mt19937_64 rng(17);
    const auto p = BatteryParams::uniform(4, 1.0, 1.0, 0.5);
    const ReferenceSpectrum spec(build_H0(p));
    for (int i = 0; i < 100; ++i) {
      const CVector psi = oracle::random_state(rng, 16);
      const auto state = QuantumState::pure(psi);
      const double e = internal_energy(state, spec);
      CHECK(std::abs(ergotropy_value(state, spec) - e) < 1e-9);
      // The generic mixed-state path agrees with the fast path.
      const auto as_mixed = QuantumState::mixed(psi * psi.adjoint());
      CHECK(std::abs(ergotropy(as_mixed, spec).value - e) < 1e-9);
      const auto split = ergotropy_split_pure(psi, spec);
      CHECK(split.total == doctest::Approx(e));
      CHECK(split.incoherent >= -1e-12);
      CHECK(split.coherent >= -1e-12);
    }
  }

  TEST_CASE("ergotropy of mixed states: bounds and split") {
    std::mt19937_64 rng(23);
    const auto p = BatteryParams::uniform(3, 1.0, 1.0, 0.5);
    const auto H0 = build_H0(p);
    const ReferenceSpectrum spec(H0);
    for (int i = 0; i < 40; ++i) {
      const CMatrix rho = oracle::random_density(rng, 8, 1 + i % 8);
      const auto state = QuantumState::mixed(rho);
      const auto rep = ergotropy_split(state, spec);
      CHECK(rep.total >= -1e-12);
      CHECK(rep.total <= rep.internal_energy + 1e-12);
      CHECK(rep.incoherent >= -1e-12);
      CHECK(rep.coherent >= -1e-12);
      CHECK(rep.total == doctest::Approx(rep.incoherent + rep.coherent));
      // The incoherent part is the ergotropy of the dephased state.
      CHECK(rep.incoherent == doctest::Approx(ergotropy(dephase_energy_basis(state, H0), spec).value).epsilon(1e-12));
      // Unitary invariance of the passive energy.
      const CMatrix U = oracle::random_unitary(rng, 8);
      const auto rotated = QuantumState::mixed(U * rho * U.adjoint());
      CHECK(ergotropy(rotated, spec).decomposition.passive_energy ==
            doctest::Approx(ergotropy(state, spec).decomposition.passive_energy).epsilon(1e-10));
    }
  }

  TEST_CASE("thermal and basis states") {
    const auto p = BatteryParams::uniform(2, 1.0, 1.0, 0.5);
    const ReferenceSpectrum spec(build_H0(p));
    RVector gibbs(4);
    for (int b = 0; b < 4; ++b) gibbs(b) = std::exp(-0.7 * popcount(static_cast<std::size_t>(b)));
    gibbs /= gibbs.sum();
    CHECK(std::abs(ergotropy_value(QuantumState::diagonal(gibbs), spec)) < 1e-14);
    CHECK(ergotropy_value(QuantumState::basis_state(2, 3), spec) == doctest::Approx(2.0));
    CHECK(ergotropy_split(QuantumState::basis_state(2, 3), spec).coherent == doctest::Approx(0.0));
    CHECK_THROWS_AS(ergotropy_value(QuantumState::ground(3), spec), ArgumentError);
  }

  TEST_CASE("state constructors validate") {
    CHECK_THROWS(QuantumState::pure(CVector::Ones(4)));
    CMatrix bad = CMatrix::Identity(2, 2);
    CHECK_THROWS(QuantumState::mixed(bad));
    CMatrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    CHECK_THROWS(QuantumState::mixed(neg));
    CHECK(QuantumState::maximally_mixed(2).trace() == doctest::Approx(1.0));
  }
}
