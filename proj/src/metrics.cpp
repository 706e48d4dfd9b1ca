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

#include "qbatt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <unsupported/Eigen/NonLinearOptimization>

#include "qbatt/ergotropy.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/log.hpp"

namespace qbatt {

std::vector<double> ergotropy_series(const ChargingTrace &trace, const ManyBodyOperator &H0) {
  trace.validate();
  const ReferenceSpectrum spectrum(H0);
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto &s : trace.states) out.push_back(ergotropy_value(s, spectrum));
  return out;
}

std::vector<double> energy_series(const ChargingTrace &trace, const ManyBodyOperator &H0) {
  trace.validate();
  const ReferenceSpectrum spectrum(H0);
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto &s : trace.states) out.push_back(internal_energy(s, spectrum));
  return out;
}

PowerSeries average_power(const std::vector<double> &times, const std::vector<double> &ergotropy) {
  if (times.size() != ergotropy.size()) throw ArgumentError("times and ergotropy differ in length");
  if (times.empty()) throw ArgumentError("empty series");
  if (std::abs(ergotropy.front()) > 1e-9) {
    warn("average_power: initial ergotropy " + std::to_string(ergotropy.front()) + " is not zero");
  }
  PowerSeries s;
  s.times = times;
  s.average_power.resize(times.size());
  const double t0 = times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - t0;
    s.average_power[i] = dt > 0.0 ? ergotropy[i] / dt : 0.0;
  }
  s.optimal = optimal_power(s);
  return s;
}

PowerSeries average_power(const ChargingTrace &trace, const ManyBodyOperator &H0) {
  return average_power(trace.times, ergotropy_series(trace, H0));
}

OptimalPower optimal_power(const std::vector<double> &times, const std::vector<double> &p) {
  if (times.empty() || times.size() != p.size()) throw ArgumentError("optimal_power needs a nonempty aligned series");
  std::size_t k = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[k]) k = i;
  }
  const double t0 = times.front();
  OptimalPower opt{times[k] - t0, p[k], k};
  if (k == 0 || k + 1 >= p.size()) return opt;

  // Parabola y = a x^2 + b x through the three points, origin at the argmax.
  const double x0 = times[k - 1] - times[k], x2 = times[k + 1] - times[k];
  const double y0 = p[k - 1] - p[k], y2 = p[k + 1] - p[k];
  const double det = x0 * x2 * (x0 - x2);
  if (det == 0.0) return opt;
  const double a = (y0 * x2 - y2 * x0) / det;
  const double b = (x0 * x0 * y2 - x2 * x2 * y0) / det;
  if (!(a < 0.0)) return opt;
  const double xs = std::clamp(-b / (2.0 * a), x0, x2);
  opt.dt_max = times[k] + xs - t0;
  opt.p_opt = p[k] + a * xs * xs + b * xs;
  return opt;
}

OptimalPower optimal_power(const PowerSeries &series) { return optimal_power(series.times, series.average_power); }

PowerSeries instantaneous_power(const std::vector<double> &times, const std::vector<double> &e, double step) {
  if (times.size() != e.size()) throw ArgumentError("times and ergotropy differ in length");
  if (!(step > 0.0)) throw ArgumentError("finite-difference step must be positive");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - times[i - 1] > step * (1.0 + 1e-9)) {
      throw ArgumentError("grid spacing exceeds the finite-difference step");
    }
  }
  PowerSeries s;
  s.times = times;
  s.instantaneous_power.assign(times.size(), std::nullopt);
  std::size_t j = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double target = times[i] + step;
    if (target > times.back() * (1.0 + 1e-12) + 1e-12) break;
    j = std::max(j, i);
    while (j + 1 < times.size() && times[j + 1] <= target) ++j;
    double e_target;
    if (std::abs(times[j] - target) <= 1e-12 * std::max(1.0, std::abs(target)) || j + 1 >= times.size()) {
      e_target = e[j];
    } else {
      const double w = (target - times[j]) / (times[j + 1] - times[j]);
      e_target = (1.0 - w) * e[j] + w * e[j + 1];
    }
    s.instantaneous_power[i] = (e_target - e[i]) / step;
  }
  return s;
}

PowerSeries instantaneous_power(const ChargingTrace &trace, const ManyBodyOperator &H0, double step) {
  return instantaneous_power(trace.times, ergotropy_series(trace, H0), step);
}

MaybeSeries bound_ratio(const PowerSeries &series, ChargingKind kind, double omega0, double v_dv) {
  if (!(v_dv > 0.0) || !(omega0 > 0.0)) throw DegenerateInputError("bound ratio needs omega0 > 0 and v_dv > 0");
  const double limit = 0.5 * partition_size(kind) + kBoundTolerance;
  MaybeSeries r(series.instantaneous_power.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!series.instantaneous_power[i]) continue;
    const double v = std::abs(*series.instantaneous_power[i]) / (omega0 * v_dv);
    if (v > limit) {
      std::ostringstream msg;
      msg << to_string(kind) << " power ratio " << v << " exceeds " << limit << " at t = " << series.times[i];
      throw InvariantViolation(msg.str());
    }
    r[i] = v;
  }
  return r;
}

bool average_power_bound_check(const PowerSeries &series, int k, double omega0, double v_dv) {
  const double bound = power_bound(k, omega0, v_dv);
  const double limit = bound + kBoundTolerance * std::max(1.0, bound);
  for (std::size_t i = 0; i < series.average_power.size(); ++i) {
    if (std::abs(series.average_power[i]) > limit) {
      std::ostringstream msg;
      msg << "average power " << series.average_power[i] << " exceeds bound " << bound << " at t = " << series.times[i];
      throw InvariantViolation(msg.str());
    }
  }
  return true;
}

double gamma_ad(double p_opt_qu, double p_opt_cl) {
  if (p_opt_cl == 0.0) throw DegenerateInputError("classical optimal power is zero");
  return p_opt_qu / p_opt_cl - 1.0;
}

double gamma_ad(const PowerSeries &qu, const PowerSeries &cl) {
  if (!qu.optimal || !cl.optimal) throw ArgumentError("gamma_ad needs both optima");
  return gamma_ad(qu.optimal->p_opt, cl.optimal->p_opt);
}

std::optional<double> g2_from_populations(const RVector &pops, int n_cells) {
  if (n_cells < 2) throw ArgumentError("g2 needs at least two cells");
  if (static_cast<std::size_t>(pops.size()) != basis_dim(n_cells)) throw ArgumentError("population length mismatch");
  std::vector<double> n(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<double> nn(static_cast<std::size_t>(n_cells - 1), 0.0);
  for (Eigen::Index b = 0; b < pops.size(); ++b) {
    const double p = pops(b);
    if (p == 0.0) continue;
    const auto idx = static_cast<std::size_t>(b);
    for (int j = 0; j < n_cells; ++j) {
      if (bit_of(idx, j)) {
        n[static_cast<std::size_t>(j)] += p;
        if (j + 1 < n_cells && bit_of(idx, j + 1)) nn[static_cast<std::size_t>(j)] += p;
      }
    }
  }
  double acc = 0.0;
  for (int j = 0; j + 1 < n_cells; ++j) {
    const double a = n[static_cast<std::size_t>(j)], b = n[static_cast<std::size_t>(j + 1)];
    if (a < kG2Floor || b < kG2Floor) return std::nullopt;
    acc += nn[static_cast<std::size_t>(j)] / (a * b);
  }
  return acc / static_cast<double>(n_cells - 1);
}

MaybeSeries g2_correlation(const ChargingTrace &trace) {
  trace.validate();
  MaybeSeries out;
  out.reserve(trace.size());
  for (const auto &s : trace.states) out.push_back(g2_from_populations(s.populations(), s.n_sites()));
  return out;
}

PowerDeviation power_deviation(double p_e, double p_erg, double p_exp) {
  if (p_e == 0.0 || p_exp == 0.0) throw DegenerateInputError("power deviation denominator is zero");
  return {std::abs(p_e - p_erg) / p_e, std::abs(p_e - p_exp) / p_exp};
}

PowerDeviation power_deviation(const PowerSeries &e_theory, const PowerSeries &erg_theory, const PowerSeries &e_exp) {
  if (!e_theory.optimal || !erg_theory.optimal || !e_exp.optimal) throw ArgumentError("power_deviation needs optima");
  return power_deviation(e_theory.optimal->p_opt, erg_theory.optimal->p_opt, e_exp.optimal->p_opt);
}

double scaling_law(double a, double b, double c, double n) { return a * std::atan(b * std::pow(n, c)); }

namespace {

struct ArctanResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<ScalingPoint> &pts;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(pts.size()); }

  // x = (a, b, log c)
  int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &f) const {
    const double c = std::exp(x(2));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      f(static_cast<Eigen::Index>(i)) = x(0) * std::atan(x(1) * std::pow(pts[i].n, c)) - pts[i].gamma;
    }
    return 0;
  }

  int df(const Eigen::VectorXd &x, Eigen::MatrixXd &J) const {
    const double a = x(0), b = x(1), c = std::exp(x(2));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double nc = std::pow(pts[i].n, c);
      const double u = b * nc;
      const double d = 1.0 / (1.0 + u * u);
      const auto r = static_cast<Eigen::Index>(i);
      J(r, 0) = std::atan(u);
      J(r, 1) = a * d * nc;
      J(r, 2) = a * d * b * nc * std::log(pts[i].n) * c;
    }
    return 0;
  }
};

} // namespace

ScalingFit fit_scaling(const std::vector<ScalingPoint> &points) {
  if (points.size() < 4) throw InsufficientDataError("scaling fit needs at least 4 points");
  double gmax = 0.0, data2 = 0.0;
  for (const auto &p : points) {
    if (!(p.n >= 3.0)) throw ArgumentError("scaling fit uses N >= 3");
    gmax = std::max(gmax, p.gamma);
    data2 += p.gamma * p.gamma;
  }
  Eigen::VectorXd x(3);
  x << gmax * 2.0 / std::numbers::pi, 1.0, 0.0;

  ArctanResidual functor{points};
  Eigen::LevenbergMarquardt<ArctanResidual> lm(functor);
  lm.parameters.ftol = 1e-14;
  lm.parameters.xtol = 1e-14;
  lm.parameters.maxfev = 100000;
  constexpr int kMaxIterations = 500;

  auto status = lm.minimizeInit(x);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) throw FitFailure("improper fit input");
  int iter = 0;
  do {
    status = lm.minimizeOneStep(x);
    ++iter;
  } while (status == Eigen::LevenbergMarquardtSpace::Running && iter < kMaxIterations);

  if (status == Eigen::LevenbergMarquardtSpace::Running ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !x.allFinite()) {
    std::ostringstream msg;
    msg << "scaling fit did not converge after " << iter << " iterations; last iterate a = " << x(0)
        << ", b = " << x(1) << ", c = " << std::exp(x(2));
    throw FitFailure(msg.str());
  }

  ScalingFit fit;
  fit.a = x(0);
  fit.b = x(1);
  fit.c = std::exp(x(2));
  fit.asymptote = fit.a * std::numbers::pi / 2.0;
  Eigen::VectorXd f(static_cast<Eigen::Index>(points.size()));
  functor(x, f);
  fit.residual_norm = f.norm();
  fit.data_norm = std::sqrt(data2);
  fit.iterations = iter;
  return fit;
}

} // namespace qbatt
