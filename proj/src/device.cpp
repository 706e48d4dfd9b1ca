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

#include "qbatt/device.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "qbatt/errors.hpp"
#include "qbatt/parallel.hpp"

namespace qbatt {

using Mat8 = Eigen::Matrix<cd, 8, 8>;
using Vec8 = Eigen::Matrix<cd, 8, 1>;
using Pop8 = Eigen::Matrix<double, 8, 1>;

namespace {
constexpr double kPi = std::numbers::pi;

template <class F>
double golden_maximize(F &&f, double lo, double hi, double tol, double *best_value) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = fc >= fd ? c : d;
  if (best_value) *best_value = std::max(fc, fd);
  return x;
}
} // namespace

void CouplerSpec::validate() const {
  if (!(omega_c_max > 0.0)) throw ArgumentError("omega_c_max must be positive");
  if (!(d >= 0.0 && d <= 1.0)) throw ArgumentError("SQUID asymmetry d must lie in [0, 1]");
  if (!(std::abs(delta_phi) < 0.5)) throw ArgumentError("|delta_phi| must be below 0.5");
  if (!(omega_q1 > 0.0) || !(omega_q2 > 0.0)) throw ArgumentError("qubit frequencies must be positive");
  for (double v : {g1, g2, phi_dc, omega_phi, phi0_phase}) {
    if (!std::isfinite(v)) throw ArgumentError("coupler spec contains a non-finite value");
  }
}

CouplerSpec CouplerSpec::scaled(double factor) const {
  if (!(factor > 0.0)) throw ArgumentError("frequency scale must be positive");
  CouplerSpec s = *this;
  s.omega_q1 *= factor;
  s.omega_q2 *= factor;
  s.omega_c_max *= factor;
  s.g1 *= factor;
  s.g2 *= factor;
  s.omega_phi *= factor;
  return s;
}

double coupler_frequency(const CouplerSpec &spec, double phi) {
  const double c = std::cos(kPi * phi), s = std::sin(kPi * phi);
  return spec.omega_c_max * std::pow(c * c + spec.d * spec.d * s * s, 0.25);
}

double coupler_frequency_derivative(const CouplerSpec &spec, double phi) {
  const double c = std::cos(kPi * phi), s = std::sin(kPi * phi);
  const double f = c * c + spec.d * spec.d * s * s;
  if (f <= 0.0) throw DegenerateInputError("coupler frequency derivative is singular at zero frequency");
  const double df = -kPi * std::sin(2.0 * kPi * phi) * (1.0 - spec.d * spec.d);
  return 0.25 * spec.omega_c_max * std::pow(f, -0.75) * df;
}

double flux_at(const CouplerSpec &spec, double t) {
  return spec.phi_dc + spec.delta_phi * std::cos(spec.omega_phi * t + spec.phi0_phase);
}

double effective_coupling(const CouplerSpec &spec) {
  spec.validate();
  const double wc = coupler_frequency(spec, spec.phi_dc);
  const double d1m = spec.omega_q1 - wc, d1p = spec.omega_q1 + wc;
  const double d2m = spec.omega_q2 - wc, d2p = spec.omega_q2 + wc;
  if (d1m == 0.0 || d2m == 0.0 || d1p == 0.0 || d2p == 0.0) {
    throw DegenerateInputError("qubit-coupler detuning vanishes at phi_dc");
  }
  const double slope = coupler_frequency_derivative(spec, spec.phi_dc);
  if (spec.delta_phi != 0.0 && std::abs(slope) < 1e-12 * spec.omega_c_max) {
    throw ContractViolation("phi_dc sits at an extremum of the coupler frequency");
  }
  return -spec.delta_phi * (spec.g1 * spec.g2 / 4.0) * slope * (1.0 / (d1m * d2p) + 1.0 / (d1p * d2m));
}

Mat8 device_hamiltonian(const CouplerSpec &spec, double phi) {
  const double wc = coupler_frequency(spec, phi);
  Mat8 h = Mat8::Zero();
  // -w/2 sigma_z with sigma_z = diag(1, -1) on each body's bit.
  for (int b = 0; b < 8; ++b) {
    auto z = [&](int bit) { return ((b >> bit) & 1) ? -1.0 : 1.0; };
    h(b, b) = -0.5 * (spec.omega_q1 * z(0) + spec.omega_q2 * z(1) + wc * z(2));
    // g_i X_i X_c flips bit i and the coupler bit.
    h(b ^ 0b101, b) += spec.g1;
    h(b ^ 0b110, b) += spec.g2;
  }
  return h;
}

double dressed_sum_frequency(const CouplerSpec &spec) {
  spec.validate();
  Eigen::SelfAdjointEigenSolver<Mat8> es(device_hamiltonian(spec, spec.phi_dc));
  auto dressed = [&](Eigen::Index bare) {
    Eigen::Index best = 0;
    es.eigenvectors().row(bare).cwiseAbs2().maxCoeff(&best);
    return es.eigenvalues()(best);
  };
  return dressed(kIndex11) - dressed(kIndex00);
}

OdeOptions device_ode_options() {
  OdeOptions o;
  o.atol = 1e-11;
  o.rtol = 1e-11;
  return o;
}

double both_excited(const Pop8 &p) { return p(3) + p(7); }
double single_excited(const Pop8 &p) { return p(1) + p(2) + p(5) + p(6); }

DeviceTrace simulate_parametric(const CouplerSpec &spec, const std::vector<double> &times, const OdeOptions &opts) {
  spec.validate();
  if (times.size() < 2) throw ArgumentError("simulation grid needs at least two points");
  if (spec.delta_phi != 0.0) {
    if (!(spec.omega_phi > 0.0)) throw ArgumentError("omega_phi must be positive when the drive is on");
    const double limit = 2.0 * kPi / spec.omega_phi / kSamplesPerDrivePeriod;
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (times[i] - times[i - 1] > limit * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "grid spacing " << times[i] - times[i - 1] << " us exceeds " << limit << " us (" << kSamplesPerDrivePeriod
            << " samples per drive period)";
        throw ResolutionError(msg.str());
      }
    }
  }
  auto rhs = [&](double t, const Vec8 &psi, Vec8 &dpsi) {
    dpsi.noalias() = cd(0.0, -1.0) * (device_hamiltonian(spec, flux_at(spec, t)) * psi);
  };
  DeviceTrace out;
  Vec8 psi0 = Vec8::Zero();
  psi0(kIndex00) = 1.0;
  dopri5(
      rhs, psi0, times,
      [&](std::size_t, double t, const Vec8 &psi) {
        out.times.push_back(t);
        out.populations.push_back(psi.cwiseAbs2());
        out.max_norm_drift = std::max(out.max_norm_drift, std::abs(psi.norm() - 1.0));
        return true;
      },
      opts);
  return out;
}

Mat8 floquet_period_propagator(const CouplerSpec &spec, const OdeOptions &opts) {
  spec.validate();
  if (!(spec.omega_phi > 0.0)) throw ArgumentError("omega_phi must be positive");
  const double period = 2.0 * kPi / spec.omega_phi;
  auto rhs = [&](double t, const Mat8 &u, Mat8 &du) {
    du.noalias() = cd(0.0, -1.0) * (device_hamiltonian(spec, flux_at(spec, t)) * u);
  };
  Mat8 result = Mat8::Identity();
  OdeOptions o = opts;
  o.max_step = std::min(o.max_step, period / kSamplesPerDrivePeriod);
  dopri5(
      rhs, Mat8(Mat8::Identity()), std::vector<double>{0.0, period},
      [&](std::size_t i, double, const Mat8 &u) {
        if (i == 1) result = u;
        return true;
      },
      o);
  return result;
}

DeviceTrace stroboscopic_evolution(const CouplerSpec &spec, int n_periods) {
  if (n_periods < 1) throw ArgumentError("need at least one drive period");
  const Mat8 U = floquet_period_propagator(spec);
  const double period = 2.0 * kPi / spec.omega_phi;
  DeviceTrace out;
  Vec8 psi = Vec8::Zero();
  psi(kIndex00) = 1.0;
  out.times.reserve(static_cast<std::size_t>(n_periods) + 1);
  out.populations.reserve(static_cast<std::size_t>(n_periods) + 1);
  for (int k = 0; k <= n_periods; ++k) {
    out.times.push_back(k * period);
    out.populations.push_back(psi.cwiseAbs2());
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(psi.norm() - 1.0));
    psi = U * psi;
  }
  return out;
}

double transfer_amplitude(const CouplerSpec &spec, double omega_phi, double duration) {
  CouplerSpec s = spec;
  s.omega_phi = omega_phi;
  const double period = 2.0 * kPi / omega_phi;
  const int n = std::max(1, static_cast<int>(std::ceil(duration / period)));
  const DeviceTrace tr = stroboscopic_evolution(s, n);
  double best = 0.0;
  for (const auto &p : tr.populations) best = std::max(best, both_excited(p));
  return best;
}

ResonanceScan resonance_scan(const CouplerSpec &spec, const std::vector<double> &omega_phi_values, double duration,
                             int threads) {
  if (omega_phi_values.empty()) throw ArgumentError("empty drive-frequency scan");
  ResonanceScan scan;
  scan.points = parallel_map(omega_phi_values.size(), threads, [&](std::size_t i) {
    return ResonancePoint{omega_phi_values[i], transfer_amplitude(spec, omega_phi_values[i], duration)};
  });
  for (std::size_t i = 1; i < scan.points.size(); ++i) {
    if (scan.points[i].transfer > scan.points[scan.peak_index].transfer) scan.peak_index = i;
  }
  // FWHM: walk outward from the peak to the half-maximum crossings.
  const double half = 0.5 * scan.points[scan.peak_index].transfer;
  auto crossing = [&](int dir) {
    for (auto i = static_cast<long>(scan.peak_index); i + dir >= 0 && i + dir < static_cast<long>(scan.points.size());
         i += dir) {
      const auto &p = scan.points[static_cast<std::size_t>(i)];
      const auto &q = scan.points[static_cast<std::size_t>(i + dir)];
      if (q.transfer <= half) {
        const double w = (p.transfer - half) / (p.transfer - q.transfer);
        return p.omega_phi + w * (q.omega_phi - p.omega_phi);
      }
    }
    return scan.points[dir < 0 ? 0 : scan.points.size() - 1].omega_phi;
  };
  scan.peak_width = std::abs(crossing(+1) - crossing(-1));
  return scan;
}

ResonancePoint find_resonance(const CouplerSpec &spec, double lo, double hi, double duration, double tol) {
  if (!(hi > lo)) throw ArgumentError("resonance search interval is empty");
  double best = 0.0;
  const double w = golden_maximize([&](double x) { return transfer_amplitude(spec, x, duration); }, lo, hi, tol, &best);
  return {w, best};
}

namespace {
std::mutex fftw_planner_mutex;

// Residual of the best fit A + B cos(w t) + C sin(w t).
double sinusoid_residual(const std::vector<double> &t, const Eigen::VectorXd &y, double w) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(t.size()), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    X(r, 1) = std::cos(w * t[i]);
    X(r, 2) = std::sin(w * t[i]);
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  return (X * beta - y).squaredNorm();
}
} // namespace

double extract_oscillation_frequency(const std::vector<double> &times, const std::vector<double> &series) {
  if (times.size() != series.size()) throw ArgumentError("times and series differ in length");
  if (times.size() < 8) throw InsufficientDataError("too few samples for frequency extraction");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt) throw ArgumentError("frequency extraction needs a uniform grid");
  }
  const auto n = static_cast<Eigen::Index>(series.size());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  const double mean = y.mean();
  Eigen::VectorXd yc = y.array() - mean;
  const double rms = std::sqrt(yc.squaredNorm() / static_cast<double>(n));
  if (rms < 1e-9) throw InsufficientDataError("signal is constant");

  // Zero-padded DFT for a coarse peak.
  const int pad = 8;
  const int L = static_cast<int>(n) * pad;
  std::vector<double> in(static_cast<std::size_t>(L), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = yc(i);
  std::vector<fftw_complex> out(static_cast<std::size_t>(L / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    plan = fftw_plan_dft_r2c_1d(L, in.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  int k = 1;
  double best = -1.0;
  for (int j = 1; j <= L / 2; ++j) {
    const double mag = std::hypot(out[static_cast<std::size_t>(j)][0], out[static_cast<std::size_t>(j)][1]);
    if (mag > best) {
      best = mag;
      k = j;
    }
  }
  const double bin = 2.0 * kPi / (L * dt);
  const double window = times.back() - times.front();
  // Local least-squares refinement within one bin of the padded peak.
  const double lo = std::max(bin * 0.5, (k - 1) * bin), hi = (k + 1) * bin;
  double neg_best = 0.0;
  const double w = golden_maximize([&](double x) { return -sinusoid_residual(times, y, x); }, lo, hi,
                                   1e-10 * hi, &neg_best);
  if (w * window < 2.0 * 2.0 * kPi) {
    throw InsufficientDataError("fewer than two oscillation periods in the window");
  }
  return 0.5 * w;
}

} // namespace qbatt
