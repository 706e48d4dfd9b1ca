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

#include "qbatt/device.hpp"
#include "qbatt/device_table.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/random.hpp"
#include "qbatt/readout.hpp"

using namespace qbatt;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reference coupler in rad/us (lab units).
CouplerSpec reference_coupler() {
  CouplerSpec s;
  s.omega_q1 = kTwoPi * 4575.0;
  s.omega_q2 = kTwoPi * 4249.0;
  s.omega_c_max = kTwoPi * 6000.0;
  s.g1 = s.g2 = kTwoPi * 100.0;
  s.d = 0.3;
  s.phi_dc = 0.25;
  s.delta_phi = 0.05;
  return s;
}

// Effective coupling with a finite-difference flux slope.
double coupling_oracle(const CouplerSpec &s) {
  auto wc = [&](double p) {
    return s.omega_c_max *
           std::pow(std::pow(std::cos(std::numbers::pi * p), 2) + s.d * s.d * std::pow(std::sin(std::numbers::pi * p), 2),
                    0.25);
  };
  const double h = 1e-6;
  const double slope = (wc(s.phi_dc + h) - wc(s.phi_dc - h)) / (2.0 * h);
  const double w = wc(s.phi_dc);
  return -s.delta_phi * s.g1 * s.g2 / 4.0 * slope *
         (1.0 / ((s.omega_q1 - w) * (s.omega_q2 + w)) + 1.0 / ((s.omega_q1 + w) * (s.omega_q2 - w)));
}

} // namespace

TEST_SUITE("device") {
  TEST_CASE("coupler tuning curve") {
    const auto s = reference_coupler();
    CHECK(coupler_frequency(s, 0.0) == doctest::Approx(s.omega_c_max));
    CHECK(coupler_frequency(s, 0.5) == doctest::Approx(s.omega_c_max * std::sqrt(s.d)));
    for (double phi : {0.05, 0.2, 0.25, 0.4}) {
      const double h = 1e-6;
      const double fd = (coupler_frequency(s, phi + h) - coupler_frequency(s, phi - h)) / (2 * h);
      CHECK(coupler_frequency_derivative(s, phi) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK(flux_at(s, 0.0) == doctest::Approx(s.phi_dc + s.delta_phi));
  }

  TEST_CASE("effective coupling against the oracle and the frozen value") {
    const auto s = reference_coupler();
    CHECK(effective_coupling(s) == doctest::Approx(coupling_oracle(s)).epsilon(1e-8));
    CHECK(effective_coupling(s) == doctest::Approx(-1.575179724344564).epsilon(1e-9));
    // Linear in the modulation amplitude and covariant under frequency scaling.
    auto s2 = s;
    s2.delta_phi = 0.1;
    CHECK(effective_coupling(s2) == doctest::Approx(2.0 * effective_coupling(s)));
    CHECK(effective_coupling(s.scaled(1e-3)) == doctest::Approx(1e-3 * effective_coupling(s)));
    auto flat = s;
    flat.phi_dc = 0.0;
    CHECK_THROWS_AS(effective_coupling(flat), ContractViolation);
    auto bad = s;
    bad.delta_phi = 0.6;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
  }

  TEST_CASE("static Hamiltonian") {
    const auto s = reference_coupler().scaled(1e-3);
    const auto h = device_hamiltonian(s, s.phi_dc);
    CHECK((h - h.adjoint()).norm() == 0.0);
    // Couplings conserve parity of (qubit bit + coupler bit) per pair.
    CHECK(h(0b101, 0).real() == doctest::Approx(s.g1));
    CHECK(h(0b110, 0).real() == doctest::Approx(s.g2));
    CHECK(std::abs(h(0b011, 0)) == 0.0);
    const double sum = dressed_sum_frequency(s);
    CHECK(std::abs(sum - (s.omega_q1 + s.omega_q2)) < 0.05 * (s.omega_q1 + s.omega_q2));
  }

  TEST_CASE("Floquet propagator and stroboscopic sampling") {
    auto s = reference_coupler().scaled(1e-3);
    s.omega_phi = dressed_sum_frequency(s);
    const auto U = floquet_period_propagator(s);
    CHECK((U.adjoint() * U - Eigen::Matrix<cd, 8, 8>::Identity()).norm() < 1e-8);
    const auto strobe = stroboscopic_evolution(s, 5);
    REQUIRE(strobe.times.size() == 6);
    const double T = kTwoPi / s.omega_phi;
    std::vector<double> grid;
    for (int k = 0; k <= 5 * kSamplesPerDrivePeriod; ++k) grid.push_back(k * T / kSamplesPerDrivePeriod);
    const auto direct = simulate_parametric(s, grid);
    CHECK(direct.max_norm_drift < 1e-8);
    for (int k = 0; k <= 5; ++k) {
      const auto i = static_cast<std::size_t>(k * kSamplesPerDrivePeriod);
      CHECK((direct.populations[i] - strobe.populations[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() < 1e-7);
    }
    std::vector<double> coarse{0.0, T / 2};
    CHECK_THROWS_AS(simulate_parametric(s, coarse), ResolutionError);
  }

  TEST_CASE("population marginals") {
    Eigen::Matrix<double, 8, 1> p;
    p << 0.1, 0.2, 0.05, 0.3, 0.0, 0.15, 0.1, 0.1;
    CHECK(both_excited(p) == doctest::Approx(0.4));
    CHECK(single_excited(p) == doctest::Approx(0.2 + 0.05 + 0.15 + 0.1));
  }

  TEST_CASE("oscillation frequency of a synthetic sin^2 signal") {
    for (double g : {0.37, 1.3, 4.1}) {
      std::vector<double> t, y;
      const double window = 6.0 * std::numbers::pi / g;
      for (int i = 0; i <= 400; ++i) {
        t.push_back(window * i / 400.0);
        y.push_back(std::pow(std::sin(g * t.back()), 2));
      }
      CHECK(extract_oscillation_frequency(t, y) == doctest::Approx(g).epsilon(1e-6));
    }
    std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, flat(9, 0.5);
    CHECK_THROWS_AS(extract_oscillation_frequency(t, flat), InsufficientDataError);
    CHECK_THROWS(extract_oscillation_frequency({0, 1, 2}, {0, 1, 0}));
  }
}

TEST_SUITE("readout") {
  TEST_CASE("response matrix from the reference table") {
    const auto model = build_readout_model(reference_device_table().fidelities(1));
    Eigen::Matrix2d expected;
    expected << 0.936, 0.149, 0.064, 0.851;
    CHECK((model.response[0] - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(build_readout_model({{0.4, 0.9}}), ArgumentError);
    CHECK_THROWS_AS(build_readout_model({{1.2, 0.9}}), ArgumentError);
  }

  TEST_CASE("matrix-free noise matches the dense tensor product") {
    std::mt19937_64 rng(13);
    const auto model = build_readout_model(reference_device_table().fidelities(4));
    Eigen::MatrixXd dense = Eigen::MatrixXd::Ones(1, 1);
    for (int q = 3; q >= 0; --q) {
      Eigen::MatrixXd next(dense.rows() * 2, dense.cols() * 2);
      for (Eigen::Index i = 0; i < dense.rows(); ++i)
        for (Eigen::Index j = 0; j < dense.cols(); ++j)
          next.block(2 * i, 2 * j, 2, 2) = dense(i, j) * model.response[static_cast<std::size_t>(q)];
      dense = next;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RVector p(16);
    for (auto &x : p) x = u(rng);
    p /= p.sum();
    CHECK((apply_noise(model, p) - dense * p).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((unbiased_inverse(model, dense * p) - dense.inverse() * (dense * p)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("noiseless round trip up to eight qubits") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 1; n <= 8; ++n) {
      const auto model = build_readout_model(reference_device_table().fidelities(n));
      RVector p(1 << n);
      for (auto &x : p) x = u(rng);
      p /= p.sum();
      CHECK((unbiased_inverse(model, apply_noise(model, p)) - p).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((mitigate(model, apply_noise(model, p)) - p).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("mitigation clips and renormalizes") {
    const auto model = build_readout_model({{0.9, 0.8}});
    RVector f(2);
    f << 0.05, 0.95; // below the noise floor of outcome 0
    const RVector raw = unbiased_inverse(model, f);
    CHECK(raw(0) < 0.0);
    const RVector m = mitigate(model, f);
    CHECK(m(0) == 0.0);
    CHECK(m.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("sampling is deterministic and unbiased within errors") {
    const auto model = build_readout_model(reference_device_table().fidelities(3));
    RVector p(8);
    p << 0.3, 0.1, 0.05, 0.15, 0.1, 0.1, 0.05, 0.15;
    const RVector noisy = apply_noise(model, p);
    const auto c1 = sample_counts(noisy, 200000, derive_seed(5, 2));
    CHECK(c1 == sample_counts(noisy, 200000, derive_seed(5, 2)));
    std::uint64_t total = 0;
    for (auto c : c1) total += c;
    CHECK(total == 200000);
    const RVector f = frequencies_from_counts(c1);
    const RVector est = unbiased_inverse(model, f);
    const RVector sigma = inverse_standard_error(model, f, 200000);
    for (Eigen::Index i = 0; i < 8; ++i) {
      CHECK(sigma(i) > 0.0);
      CHECK(std::abs(est(i) - p(i)) < 5.0 * sigma(i));
    }
    CHECK_THROWS(sample_counts(RVector::Constant(2, 0.7), 10, 1));
  }

  TEST_CASE("device table") {
    const auto &table = reference_device_table();
    CHECK(table.qubits.size() == 12);
    CHECK_NOTHROW(table.validate());
    const auto spec = table.lindblad(4);
    CHECK(spec.gamma_minus.size() == 4);
    const auto r = rates_from_times(table.qubits[0].t1_us, table.qubits[0].t2_echo_us);
    CHECK(spec.gamma_minus[0] == doctest::Approx(r.gamma_minus));
    CHECK(spec.gamma_z[0] == doctest::Approx(r.gamma_z));
    CHECK_THROWS(table.lindblad(13));
  }
}
