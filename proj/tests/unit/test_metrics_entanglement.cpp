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
#include "qbatt/dynamics.hpp"
#include "qbatt/entanglement.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/metrics.hpp"

using namespace qbatt;

namespace {

// Root of tan x = 2 x on (0, pi/2) by bisection.
double tan_root() {
  double lo = 0.5, hi = 1.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::tan(mid) - 2.0 * mid > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

QuantumState two_cell_quantum(double gt) {
  CVector psi = CVector::Zero(4);
  psi(0) = std::cos(gt);
  psi(3) = cd(0, -1) * std::sin(gt);
  return QuantumState::pure(psi);
}

} // namespace

TEST_SUITE("metrics") {
  TEST_CASE("optimal charging time of a sin^2 ergotropy") {
    const double x = tan_root();
    CHECK(x == doctest::Approx(1.16556).epsilon(1e-5));
    const double g = 2.7;
    const auto times = uniform_grid(1.2, 0.002);
    std::vector<double> e;
    for (double t : times) e.push_back(std::pow(std::sin(g * t), 2));
    const auto series = average_power(times, e);
    REQUIRE(series.optimal);
    CHECK(series.optimal->dt_max == doctest::Approx(x / g).epsilon(1e-4));
    CHECK(series.optimal->p_opt == doctest::Approx(std::pow(std::sin(x), 2) * g / x).epsilon(1e-7));
  }

  TEST_CASE("average power starts at zero and tracks E / t") {
    const std::vector<double> t{0.0, 0.5, 1.0, 1.5};
    const std::vector<double> e{0.0, 1.0, 3.0, 3.0};
    const auto s = average_power(t, e);
    CHECK(s.average_power[0] == 0.0);
    CHECK(s.average_power[2] == doctest::Approx(3.0));
    CHECK_THROWS_AS(average_power(t, {0.0, 1.0}), ArgumentError);
  }

  TEST_CASE("instantaneous power by forward differences") {
    const auto times = uniform_grid(1.0, 0.01);
    std::vector<double> e;
    for (double t : times) e.push_back(2.0 * t + 1.0);
    const auto s = instantaneous_power(times, e, 0.02);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] + 0.02 <= 1.0 + 1e-12) {
        REQUIRE(s.instantaneous_power[i]);
        CHECK(*s.instantaneous_power[i] == doctest::Approx(2.0));
      } else {
        CHECK_FALSE(s.instantaneous_power[i]);
      }
    }
    // Interpolates when the step is not a multiple of the spacing.
    const auto s2 = instantaneous_power(times, e, 0.015);
    CHECK(*s2.instantaneous_power[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(instantaneous_power(times, e, 0.005), ArgumentError);
  }

  TEST_CASE("bound checks reject violations") {
    PowerSeries s;
    s.times = {0.0, 0.1};
    s.instantaneous_power = {0.4, 0.6};
    s.average_power = {0.0, 0.6};
    CHECK_THROWS_AS(bound_ratio(s, ChargingKind::classical, 1.0, 1.0), InvariantViolation);
    const auto r = bound_ratio(s, ChargingKind::quantum, 1.0, 1.0);
    CHECK(*r[1] == doctest::Approx(0.6));
    CHECK_THROWS_AS(average_power_bound_check(s, 1, 1.0, 1.0), InvariantViolation);
    CHECK(average_power_bound_check(s, 2, 1.0, 1.0));
    CHECK_THROWS_AS(bound_ratio(s, ChargingKind::quantum, 1.0, 0.0), DegenerateInputError);
  }

  TEST_CASE("advantage and deviation") {
    CHECK(gamma_ad(1.5, 1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gamma_ad(1.0, 0.0), DegenerateInputError);
    const auto d = power_deviation(2.0, 1.9, 2.5);
    CHECK(d.theory == doctest::Approx(0.05));
    CHECK(d.experiment == doctest::Approx(0.2));
  }

  TEST_CASE("g2 of product and anti-blockade states") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int n = 2; n <= 6; ++n) {
      std::vector<double> q(static_cast<std::size_t>(n));
      for (auto &x : q) x = u(rng);
      RVector pops(1 << n);
      for (int b = 0; b < (1 << n); ++b) {
        double p = 1.0;
        for (int k = 0; k < n; ++k) p *= bit_of(static_cast<std::size_t>(b), k) ? q[static_cast<std::size_t>(k)] : 1.0 - q[static_cast<std::size_t>(k)];
        pops(b) = p;
      }
      CHECK(*g2_from_populations(pops, n) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (double gt : {0.1, 0.7, 1.4}) {
      const auto g2 = g2_from_populations(two_cell_quantum(gt).populations(), 2);
      CHECK(*g2 == doctest::Approx(1.0 / std::pow(std::sin(gt), 2)).epsilon(1e-12));
    }
    CHECK_FALSE(g2_from_populations(QuantumState::ground(3).populations(), 3));
    CHECK_THROWS_AS(g2_from_populations(RVector::Ones(2), 1), ArgumentError);
  }

  TEST_CASE("arctan scaling fit recovers synthetic parameters") {
    std::vector<ScalingPoint> pts;
    for (int n = 3; n <= 21; ++n) pts.push_back({double(n), scaling_law(0.4, 0.05, 1.3, n)});
    const auto fit = fit_scaling(pts);
    CHECK(fit.a == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(fit.b == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(fit.c == doctest::Approx(1.3).epsilon(1e-6));
    CHECK(fit.asymptote == fit.a * std::numbers::pi / 2.0);
    CHECK(fit.residual_norm < 1e-8 * fit.data_norm);
    CHECK_THROWS_AS(fit_scaling({pts.begin(), pts.begin() + 3}), InsufficientDataError);
    CHECK_THROWS_AS(fit_scaling({{2.0, 0.1}, {3.0, 0.2}, {4.0, 0.3}, {5.0, 0.35}}), ArgumentError);
  }
}

TEST_SUITE("entanglement") {
  TEST_CASE("bipartition enumeration") {
    const auto parts = enumerate_bipartitions(5, 2);
    CHECK(parts.size() == 10);
    CHECK(parts.front().subset == std::vector<int>{0, 1});
    CHECK(parts.back().subset == std::vector<int>{3, 4});
    CHECK(parts[3].complement() == std::vector<int>{1, 2, 3});
    CHECK_THROWS_AS(enumerate_bipartitions(4, 0), ArgumentError);
    CHECK_THROWS_AS(enumerate_bipartitions(20, 10, 1000), CapacityError);
    CHECK_THROWS_AS((Bipartition{3, {1, 1}}.validate()), ArgumentError);
  }

  TEST_CASE("partial trace matches brute force") {
    std::mt19937_64 rng(31);
    for (int n = 2; n <= 5; ++n) {
      const CVector psi = oracle::random_state(rng, 1 << n);
      const CMatrix rho = oracle::random_density(rng, 1 << n, 3);
      for (int na = 1; na < n; ++na) {
        for (const auto &part : enumerate_bipartitions(n, na)) {
          const CMatrix ref_pure = oracle::partial_trace(psi * psi.adjoint(), n, part.subset);
          const CMatrix ref_mixed = oracle::partial_trace(rho, n, part.subset);
          CHECK((reduced_density_matrix(QuantumState::pure(psi), part) - ref_pure).cwiseAbs().maxCoeff() < 1e-14);
          CHECK((reduced_density_matrix(QuantumState::mixed(rho), part) - ref_mixed).cwiseAbs().maxCoeff() < 1e-14);
          // Pure states: complementary subsystems share their purity.
          const Bipartition comp{n, part.complement()};
          CHECK(purity(QuantumState::pure(psi), part) == doctest::Approx(purity(QuantumState::pure(psi), comp)));
        }
      }
    }
  }

  TEST_CASE("Renyi-2 entropy values") {
    const Bipartition half{2, {0}};
    CHECK(renyi2(two_cell_quantum(std::numbers::pi / 4), half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(renyi2(QuantumState::ground(2), half)) < 1e-15);
    CHECK(renyi2(QuantumState::maximally_mixed(3), Bipartition{3, {0, 2}}) == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("entropy growth") {
    const auto rep = entropy_growth(QuantumState::ground(2), two_cell_quantum(std::numbers::pi / 4), 0.1);
    CHECK(rep.average == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(rep.dt_used == 0.1);
    // Classical charging keeps a product state.
    const auto p = BatteryParams::uniform(4, 1.0, 1.0, 0.8);
    ChargingTrace trace;
    evolve_unitary(chain_Vcl(p), QuantumState::ground(4).vector(), uniform_grid(0.3, 0.01),
                   [&](std::size_t, double t, const CVector &psi) {
                     trace.times.push_back(t);
                     trace.states.push_back(QuantumState::pure(psi));
                     return true;
                   });
    const auto cl = entropy_growth(trace, 0.11);
    CHECK(std::abs(cl.average) < 1e-10);
    CHECK(cl.dt_used == doctest::Approx(0.11));
    CHECK_THROWS_AS(entropy_growth(trace, 5.0), InsufficientDataError);
  }

  TEST_CASE("noise correction is linear in the subsystem fraction") {
    CHECK(noise_correct(0.9, 2, 6) == 0.9 * (1.0 - 2.0 / 6.0));
    CHECK(noise_correct(0.9, 0, 6) == 0.9);
    CHECK_THROWS_AS(noise_correct(0.9, 7, 6), ArgumentError);
  }

  TEST_CASE("sampled purity is consistent with the exact value") {
    std::mt19937_64 rng(41);
    const CVector psi = oracle::random_state(rng, 16);
    const auto state = QuantumState::pure(psi);
    const Bipartition part{4, {0, 1}};
    const double exact = purity(state, part);
    int within = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto s = sampled_purity(state, part, 100, 200, seed);
      CHECK(s.std_error > 0.0);
      if (std::abs(s.estimate - exact) <= 3.0 * s.std_error) ++within;
    }
    CHECK(within >= 18);
    const auto a = sampled_purity(state, part, 20, 50, 9);
    const auto b = sampled_purity(state, part, 20, 50, 9);
    CHECK(a.estimate == b.estimate);
    CHECK_THROWS_AS(sampled_purity(state, part, 1, 50, 9), ArgumentError);
  }
}
