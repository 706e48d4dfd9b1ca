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
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qbatt/battery.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/operators.hpp"

using namespace qbatt;

namespace {

double max_abs_diff(const CMatrix &a, const CMatrix &b) { return (a - b).cwiseAbs().maxCoeff(); }

// Spread of the open-chain pair-creation Hamiltonian from its free-fermion modes.
double free_fermion_spread(int n, double g) {
  double s = 0.0;
  for (int k = 1; k <= n; ++k) s += std::abs(2.0 * g * std::cos(k * std::numbers::pi / (n + 1)));
  return s;
}

} // namespace

TEST_SUITE("operators") {
  TEST_CASE("basis helpers") {
    CHECK_THROWS_AS(basis_dim(0), ArgumentError);
    CHECK(basis_dim(5) == 32);
    CHECK(sites_for_dim(1024) == 10);
    CHECK_THROWS(sites_for_dim(6));
    CHECK(popcount(0b1011) == 3);
    CHECK(bit_of(0b100, 2));
    CHECK_FALSE(bit_of(0b100, 1));
  }

  TEST_CASE("local operator conventions") {
    // sigma_plus raises 0 -> 1.
    CHECK(sigma_plus()(1, 0) == cd(1.0));
    CHECK(sigma_plus()(0, 1) == cd(0.0));
    CHECK((sigma_plus() * sigma_minus() - number_op()).norm() == doctest::Approx(0.0));
    CHECK((pauli_x() * pauli_y() - cd(0, 1) * pauli_z()).norm() == doctest::Approx(0.0));
  }

  TEST_CASE("embedding matches Kronecker products") {
    for (int n = 1; n <= 4; ++n) {
      for (int s = 0; s < n; ++s) {
        const CMatrix ours = embed_local(pauli_x(), s, n).to_dense();
        CHECK(max_abs_diff(ours, oracle::on_sites(n, {{s, oracle::sx()}})) == 0.0);
      }
      for (int a = 0; a + 1 < n; ++a) {
        const CMatrix ours = embed_pair(sigma_plus(), a, sigma_minus(), a + 1, n).to_dense();
        CHECK(max_abs_diff(ours, oracle::on_sites(n, {{a, oracle::sp()}, {a + 1, oracle::sm()}})) == 0.0);
      }
    }
    CHECK_THROWS_AS(embed_local(pauli_x(), 3, 3), ArgumentError);
    CHECK_THROWS_AS(embed_pair(pauli_x(), 1, pauli_x(), 1, 3), ArgumentError);
  }

  TEST_CASE("local term sum agrees with its assembled operator") {
    std::mt19937_64 rng(7);
    LocalTermSum sum(5);
    sum.add_single(0.3 * pauli_x(), 0);
    sum.add_single(0.7 * number_op(), 4);
    sum.add_single(0.2 * number_op(), 4); // accumulates
    sum.add_pair(sigma_plus(), 1, sigma_plus(), 2);
    sum.add_pair(sigma_minus(), 1, sigma_minus(), 2);
    sum.add_pair(pauli_z(), 3, pauli_z(), 4);
    CHECK(sum.hermitian());
    const CMatrix dense = sum.to_operator().to_dense();
    const CMatrix ref = 0.3 * oracle::on_sites(5, {{0, oracle::sx()}}) + 0.9 * oracle::on_sites(5, {{4, oracle::nop()}}) +
                        oracle::on_sites(5, {{1, oracle::sp()}, {2, oracle::sp()}}) +
                        oracle::on_sites(5, {{1, oracle::sm()}, {2, oracle::sm()}}) +
                        oracle::on_sites(5, {{3, oracle::sz()}, {4, oracle::sz()}});
    CHECK(max_abs_diff(dense, ref) < 1e-14);
    const CVector x = oracle::random_state(rng, 32);
    CHECK((sum.apply(x) - ref * x).norm() < 1e-13);
  }

  TEST_CASE("commutator and algebra") {
    const auto x = embed_local(pauli_x(), 0, 2);
    const auto y = embed_local(pauli_y(), 0, 2);
    const auto z = embed_local(pauli_z(), 0, 2);
    const CMatrix c = commutator(x, y).to_dense();
    CHECK(max_abs_diff(c, cd(0, 2) * z.to_dense()) < 1e-15);
    CHECK(commutator(x, embed_local(pauli_y(), 1, 2)).nnz() == 0);
    CHECK_THROWS(x + ManyBodyOperator::zero(8));
  }

  TEST_CASE("spectral range: dense and Lanczos paths agree") {
    // N = 11 exceeds the dense threshold; free fermions give the exact answer.
    const int n = 11;
    const double g = 0.8;
    const auto p = BatteryParams::uniform(n, 1.0, g, 0.5);
    const SpectralRange lanczos = spectral_range(chain_Vqu(p));
    CHECK(lanczos.spread() == doctest::Approx(free_fermion_spread(n, g)).epsilon(1e-9));
    CHECK(lanczos.max == doctest::Approx(-lanczos.min).epsilon(1e-9));
    SpectralOptions dense;
    dense.dense_threshold = 4096;
    const SpectralRange exact = spectral_range(build_Vqu(p), dense);
    CHECK(exact.max == doctest::Approx(lanczos.max).epsilon(1e-9));
    SpectralOptions tiny;
    tiny.capacity = 1024;
    CHECK_THROWS_AS(spectral_range(chain_Vqu(p), tiny), CapacityError);
  }

  TEST_CASE("spectral norm") {
    const auto p = BatteryParams::uniform(4, 1.0, 1.0, 0.7);
    CHECK(spectral_norm(build_Vcl(p)) == doctest::Approx(4 * 0.7));
  }
}

TEST_SUITE("battery") {
  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(BatteryParams::uniform(0, 1.0, 1.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(BatteryParams::uniform(3, -1.0, 1.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(BatteryParams::uniform(3, 1.0, 0.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(BatteryParams::with_bonds({1.0, 1.0}, {1.0, 2.0}, 0.5), ArgumentError);
    const auto p = BatteryParams::with_bonds({1.0, 1.0, 1.0}, {1.0, 2.0}, 0.5);
    CHECK(p.mean_g() == doctest::Approx(1.5));
    CHECK(p.Omega == doctest::Approx(0.75));
    CHECK(p.max_energy() == doctest::Approx(3.0));
    CHECK(charging_kind_from_string(to_string(ChargingKind::quantum)) == ChargingKind::quantum);
    CHECK_THROWS(charging_kind_from_string("hybrid"));
  }

  TEST_CASE("Hamiltonians match Kronecker constructions") {
    for (int n = 1; n <= 5; ++n) {
      const auto p = BatteryParams::uniform(n, 1.3, 0.9, 0.6);
      CHECK(max_abs_diff(build_H0(p).to_dense(), oracle::h0(n, 1.3)) < 1e-14);
      CHECK(max_abs_diff(build_Vcl(p).to_dense(), oracle::vcl(n, p.Omega)) < 1e-14);
      if (n >= 2) {
        CHECK(max_abs_diff(build_Vqu(p).to_dense(), oracle::vqu(n, p.g)) < 1e-14);
        CHECK(max_abs_diff(chain_V(p, ChargingKind::quantum).to_operator().to_dense(), oracle::vqu(n, p.g)) < 1e-14);
      } else {
        CHECK_THROWS_AS(build_Vqu(p), ArgumentError);
      }
      CHECK(max_abs_diff(chain_V(p, ChargingKind::classical).to_operator().to_dense(), oracle::vcl(n, p.Omega)) <
            1e-14);
      const RVector levels = energy_levels(p);
      CHECK((levels - build_H0(p).real_diagonal()).norm() < 1e-14);
    }
  }

  TEST_CASE("driving potentials against brute-force spectra") {
    for (int n = 2; n <= 8; ++n) {
      const auto p = BatteryParams::uniform(n, 1.0, 1.1, 0.9);
      const Eigen::VectorXd e_cl = oracle::eigenvalues(oracle::vcl(n, p.Omega));
      const Eigen::VectorXd e_qu = oracle::eigenvalues(oracle::vqu(n, p.g));
      const auto dcl = driving_potential(build_Vcl(p), ChargingKind::classical);
      const auto dqu = driving_potential(chain_Vqu(p), ChargingKind::quantum);
      CHECK(dcl.v_dv == doctest::Approx(e_cl.maxCoeff() - e_cl.minCoeff()).epsilon(1e-10));
      CHECK(dcl.v_dv == doctest::Approx(2.0 * n * p.Omega).epsilon(1e-10));
      CHECK(dqu.v_dv == doctest::Approx(e_qu.maxCoeff() - e_qu.minCoeff()).epsilon(1e-10));
      CHECK(dqu.v_dv == doctest::Approx(free_fermion_spread(n, 1.1)).epsilon(1e-10));
    }
  }

  TEST_CASE("eta and the fair coupling ratio") {
    // N = 2 closed form: v_cl = 4 Omega, v_qu = 2 g.
    CHECK(std::abs(fair_alpha(2) - 0.5) < 1e-9);
    const auto p = BatteryParams::uniform(2, 1.0, 1.0, 0.75);
    CHECK(eta(p) == doctest::Approx(0.5));
    for (int n = 3; n <= 9; ++n) {
      const double a = fair_alpha(n);
      CHECK(a == doctest::Approx(free_fermion_spread(n, 1.0) / (2.0 * n)).epsilon(1e-9));
      CHECK(std::abs(eta(BatteryParams::uniform(n, 1.0, 0.7, a))) < 1e-8);
      // eta is increasing in alpha.
      CHECK(eta(BatteryParams::uniform(n, 1.0, 0.7, a + 0.05)) > 0.0);
    }
  }

  TEST_CASE("power operator is -i [H0, V]") {
    const auto p = BatteryParams::uniform(3, 1.0, 0.8, 0.5);
    for (auto kind : {ChargingKind::classical, ChargingKind::quantum}) {
      const auto H0 = build_H0(p);
      const auto V = build_V(p, kind);
      const CMatrix ref = cd(0, -1) * (H0.to_dense() * V.to_dense() - V.to_dense() * H0.to_dense());
      const auto P = power_operator(H0, V);
      CHECK(max_abs_diff(P.to_dense(), ref) < 1e-14);
      CHECK(P.hermitian());
    }
    CHECK(partition_size(ChargingKind::classical) == 1);
    CHECK(partition_size(ChargingKind::quantum) == 2);
    CHECK(power_bound(2, 1.0, 3.0) == doctest::Approx(3.0));
  }
}
