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

#include "qbatt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "qbatt/device.hpp"
#include "qbatt/ergotropy.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/io.hpp"
#include "qbatt/log.hpp"
#include "qbatt/parallel.hpp"
#include "qbatt/random.hpp"
#include "qbatt/readout.hpp"

namespace qbatt {

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const BatteryConfig &require_battery(const ExperimentConfig &cfg) {
  if (!cfg.battery) throw ConfigError("/battery", "missing");
  return *cfg.battery;
}

LocalTermSum charging_terms(const BatteryParams &p, ChargingKind kind, bool include_h0) {
  LocalTermSum V = chain_V(p, kind);
  if (include_h0) {
    for (int n = 0; n < p.n_cells; ++n)
      V.add_single(p.omega[static_cast<std::size_t>(n)] * number_op(), n);
  }
  return V;
}

// Runs the evolution that matches the options and forwards each grid point.
void dispatch_evolution(const BatteryParams &p, ChargingKind kind, const std::vector<double> &times,
                        const std::optional<LindbladSpec> &lindblad, bool include_h0, const PureObserver &on_pure,
                        const MixedObserver &on_mixed) {
  const int n = p.n_cells;
  if (lindblad) {
    if (basis_dim(n) > 1024) throw CapacityError("open-system runs are limited to 10 cells");
    ManyBodyOperator H = build_V(p, kind);
    if (include_h0) H = H + build_H0(p);
    CMatrix rho0 = CMatrix::Zero(static_cast<Eigen::Index>(basis_dim(n)), static_cast<Eigen::Index>(basis_dim(n)));
    rho0(0, 0) = 1.0;
    evolve_lindblad(H, *lindblad, rho0, times, on_mixed);
    return;
  }
  const LocalTermSum V = charging_terms(p, kind, include_h0);
  if (V.pairs().empty()) {
    evolve_product(V, product_ground(n), times, [&](std::size_t i, double t, const ProductState &cells) {
      return on_pure(i, t, product_to_vector(cells));
    });
    return;
  }
  CVector psi0 = CVector::Zero(static_cast<Eigen::Index>(basis_dim(n)));
  psi0(0) = 1.0;
  evolve_unitary(V, psi0, times, on_pure);
}

OptimalPower optimum(const std::vector<double> &times, const std::vector<double> &series) {
  return optimal_power(average_power(times, series));
}

std::string bit_label(std::size_t index, int n_cells) {
  std::string s = "p_";
  for (int k = 0; k < n_cells; ++k) s += ((index >> k) & 1U) ? '1' : '0';
  return s;
}

Cell opt(std::optional<double> v) { return v; }

} // namespace

int resolve_threads(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw ArgumentError("thread count must be at least 1");
    return *requested;
  }
  if (const char *env = std::getenv("QBATT_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
    warn("ignoring malformed QBATT_THREADS value '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ChargingRun run_charging(const BatteryParams &params, ChargingKind kind, const ChargingOptions &opts) {
  params.validate();
  if (opts.times.size() < 2) throw ArgumentError("charging grid needs at least two points");
  const int n = params.n_cells;
  const ManyBodyOperator H0 = build_H0(params);
  const ReferenceSpectrum spectrum(H0);
  const RVector levels = energy_levels(params);
  const double e_max = params.max_energy();
  const double t0 = opts.times.front();

  ChargingRun out;
  // Best average power per tracked series: energy, ergotropy, incoherent, coherent.
  std::vector<double> best(opts.split ? 4 : 2, 0.0);

  auto record = [&](double t, const ErgotropyReport &rep, RVector pops) {
    out.times.push_back(t);
    out.energy.push_back(rep.internal_energy);
    out.ergotropy.push_back(rep.total);
    if (opts.split) {
      out.incoherent.push_back(rep.incoherent);
      out.coherent.push_back(rep.coherent);
    }
    if (opts.g2 && n >= 2) {
      out.g2.push_back(g2_from_populations(pops, n));
    } else {
      out.g2.emplace_back(std::nullopt);
    }
    if (opts.keep_populations) out.populations.push_back(std::move(pops));
    if (!opts.early_stop) return true;
    const double dt = t - t0;
    if (dt <= 0.0) return true;
    const double values[4] = {rep.internal_energy, rep.total, rep.incoherent, rep.coherent};
    for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], values[k] / dt);
    const double weakest = *std::min_element(best.begin(), best.end());
    // Every tracked quantity is bounded by e_max, so P(t) <= e_max / t.
    return !(weakest > 0.0 && dt > e_max / weakest);
  };

  auto on_pure = [&](std::size_t, double t, const CVector &psi) {
    RVector pops = psi.cwiseAbs2();
    ErgotropyReport rep;
    if (opts.split) {
      rep = ergotropy_split_pure(psi, spectrum);
    } else {
      rep.internal_energy = pops.dot(levels);
      rep.total = rep.internal_energy - spectrum.ground_energy();
    }
    return record(t, rep, std::move(pops));
  };
  auto on_mixed = [&](std::size_t, double t, const CMatrix &rho) {
    const QuantumState st = QuantumState::unchecked_mixed(rho);
    ErgotropyReport rep;
    if (opts.split) {
      rep = ergotropy_split(st, spectrum);
    } else {
      rep.internal_energy = internal_energy(st, spectrum);
      rep.total = ergotropy_value(st, spectrum);
    }
    return record(t, rep, rho.diagonal().real());
  };
  dispatch_evolution(params, kind, opts.times, opts.lindblad, opts.include_h0, on_pure, on_mixed);

  out.optimal = optimum(out.times, out.ergotropy);
  out.optimal_energy = optimum(out.times, out.energy);
  if (opts.split) {
    out.optimal_incoherent = optimum(out.times, out.incoherent);
    out.optimal_coherent = optimum(out.times, out.coherent);
  }

  if (opts.entropy_dt) {
    std::optional<QuantumState> final_state;
    const std::vector<double> pair{t0, t0 + *opts.entropy_dt};
    dispatch_evolution(
        params, kind, pair, opts.lindblad, opts.include_h0,
        [&](std::size_t i, double, const CVector &psi) {
          if (i == 1) final_state = QuantumState::pure(psi);
          return true;
        },
        [&](std::size_t i, double, const CMatrix &rho) {
          if (i == 1) final_state = QuantumState::unchecked_mixed(rho);
          return true;
        });
    out.entropy = entropy_growth(QuantumState::ground(n), *final_state, *opts.entropy_dt);
  }
  return out;
}

std::optional<double> advantage(const std::optional<OptimalPower> &qu, const std::optional<OptimalPower> &cl) {
  if (!qu || !cl || std::abs(cl->p_opt) < 1e-12) return std::nullopt;
  return gamma_ad(qu->p_opt, cl->p_opt);
}

std::string config_hash(const ExperimentConfig &cfg, std::uint64_t seed) {
  nlohmann::json doc = cfg.document;
  doc["seed"] = seed;
  return sha256_hex(doc.dump());
}

CommandResult cmd_charge(const ExperimentConfig &cfg, const RunOptions &run) {
  const BatteryConfig &bat = require_battery(cfg);
  const AnalysisConfig &an = cfg.analysis;
  if (cfg.time.step_us > an.power_step_us * (1.0 + 1e-9)) {
    throw ConfigError("/analysis/power_step_us", "must not be smaller than /time/step_us");
  }
  struct Job {
    int n;
    ChargingKind kind;
  };
  std::vector<Job> jobs;
  for (int n : bat.cell_counts()) {
    for (ChargingKind k : bat.kinds) jobs.push_back({n, k});
  }
  const bool include_h0 = run.include_h0 || an.include_h0;
  Stopwatch clock;
  auto files = parallel_map(jobs.size(), run.threads, [&](std::size_t j) {
    const auto [n, kind] = jobs[j];
    const BatteryParams p = bat.params(n);
    ChargingOptions o;
    o.times = cfg.time.values();
    o.lindblad = cfg.lindblad(n);
    o.include_h0 = include_h0;
    o.split = an.split_ergotropy;
    o.keep_populations = n <= 4;
    o.g2 = an.g2;
    const ChargingRun r = run_charging(p, kind, o);
    PowerSeries avg = average_power(r.times, r.ergotropy);
    PowerSeries inst = instantaneous_power(r.times, r.ergotropy, an.power_step_us);

    if (an.bounds) {
      if (basis_dim(n) <= SpectralOptions{}.capacity) {
        const double v_dv = driving_potential(chain_V(p, kind), kind).v_dv;
        if (v_dv > 0.0) {
          bound_ratio(inst, kind, p.omega0(), v_dv);
          average_power_bound_check(avg, partition_size(kind), p.omega0(), v_dv);
        }
      } else {
        warn("bound checks skipped for N = " + std::to_string(n) + " (spectrum above the dense cap)");
      }
    }

    CsvTable t;
    t.columns = {"t_us", "energy", "ergotropy", "ergotropy_inco", "ergotropy_cohe", "avg_power", "inst_power", "g2"};
    if (n <= 4) {
      for (std::size_t b = 0; b < basis_dim(n); ++b) t.columns.push_back(bit_label(b, n));
    }
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      std::vector<Cell> row{r.times[i],
                            r.energy[i],
                            r.ergotropy[i],
                            o.split ? Cell(r.incoherent[i]) : Cell(),
                            o.split ? Cell(r.coherent[i]) : Cell(),
                            avg.average_power[i],
                            inst.instantaneous_power[i],
                            r.g2[i]};
      if (n <= 4) {
        for (Eigen::Index b = 0; b < r.populations[i].size(); ++b) row.emplace_back(r.populations[i](b));
      }
      t.add_row(std::move(row));
    }
    return OutputFile{"trace_N" + std::to_string(n) + "_" + to_string(kind) + ".csv", render_csv(t)};
  });
  CommandResult res;
  res.files = std::move(files);
  res.timings.emplace_back("charge", clock.seconds());
  return res;
}

CommandResult cmd_sweep_alpha(const ExperimentConfig &cfg, const RunOptions &run) {
  const BatteryConfig &bat = require_battery(cfg);
  if (!bat.n_cells) throw ConfigError("/battery/n_cells", "sweep-alpha needs a fixed cell count");
  const int n = *bat.n_cells;
  if (n < 2) throw ConfigError("/battery/n_cells", "sweep-alpha needs at least two cells");
  std::vector<double> alphas = bat.alpha_values;
  if (alphas.empty()) alphas.push_back(bat.params(n).Omega / bat.params(n).mean_g());

  ChargingOptions o;
  o.times = cfg.time.values();
  o.lindblad = cfg.lindblad(n);
  o.include_h0 = run.include_h0 || cfg.analysis.include_h0;
  o.split = false;
  o.early_stop = true;

  Stopwatch clock;
  // V_qu does not depend on alpha, so one quantum run serves every row.
  const OptimalPower qu = run_charging(bat.params(n, alphas.front()), ChargingKind::quantum, o).optimal;
  struct Row {
    double eta;
    OptimalPower cl;
  };
  auto rows = parallel_map(alphas.size(), run.threads, [&](std::size_t i) {
    const BatteryParams p = bat.params(n, alphas[i]);
    return Row{eta(p), run_charging(p, ChargingKind::classical, o).optimal};
  });
  CsvTable t;
  t.columns = {"alpha", "eta", "gamma_ad", "p_opt_cl", "p_opt_qu"};
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    t.add_row({alphas[i], rows[i].eta, opt(advantage(qu, rows[i].cl)), rows[i].cl.p_opt, qu.p_opt});
  }
  CommandResult res;
  res.files.push_back({"alpha_sweep.csv", render_csv(t)});
  res.timings.emplace_back("sweep_alpha", clock.seconds());
  return res;
}

CommandResult cmd_scale(const ExperimentConfig &cfg, const RunOptions &run) {
  const BatteryConfig &bat = require_battery(cfg);
  const std::vector<int> counts = bat.cell_counts();
  if (counts.front() < 2) throw ConfigError("/battery/n_range", "scaling needs at least two cells");
  const bool include_h0 = run.include_h0 || cfg.analysis.include_h0;
  const std::size_t cap = SpectralOptions{}.capacity;

  Stopwatch clock;
  struct Row {
    int n;
    double g, alpha;
    std::optional<double> eta;
    ChargingRun cl, qu;
  };
  auto rows = parallel_map(counts.size(), run.threads, [&](std::size_t i) {
    const int n = counts[i];
    const BatteryParams p = bat.params(n);
    ChargingOptions o;
    o.times = cfg.time.values();
    o.lindblad = cfg.lindblad(n);
    o.include_h0 = include_h0;
    o.split = true;
    o.early_stop = true;
    Row r{n, p.mean_g(), p.Omega / p.mean_g(), std::nullopt, {}, {}};
    if (basis_dim(n) <= cap) r.eta = eta(p);
    r.cl = run_charging(p, ChargingKind::classical, o);
    if (cfg.analysis.entropy && n <= 12) o.entropy_dt = cfg.analysis.entropy_dt_us;
    r.qu = run_charging(p, ChargingKind::quantum, o);
    return r;
  });

  CsvTable t;
  t.columns = {"n_cells",   "g_rad_per_us",  "alpha",         "eta",          "p_opt_cl",     "p_opt_qu",
               "dt_max_cl", "dt_max_qu",     "gamma_ad",      "gamma_ad_cohe", "gamma_ad_inco", "delta_sigma"};
  std::vector<ScalingPoint> points;
  for (const Row &r : rows) {
    const auto gamma = advantage(r.qu.optimal, r.cl.optimal);
    t.add_row({static_cast<double>(r.n), r.g, r.alpha, opt(r.eta), r.cl.optimal.p_opt, r.qu.optimal.p_opt,
               r.cl.optimal.dt_max, r.qu.optimal.dt_max, opt(gamma),
               opt(advantage(r.qu.optimal_coherent, r.cl.optimal_coherent)),
               opt(advantage(r.qu.optimal_incoherent, r.cl.optimal_incoherent)),
               r.qu.entropy ? Cell(r.qu.entropy->average) : Cell()});
    if (gamma && r.n >= 3) points.push_back({static_cast<double>(r.n), *gamma});
  }
  CommandResult res;
  res.files.push_back({"scaling.csv", render_csv(t)});
  if (points.size() >= 4) {
    try {
      const ScalingFit f = fit_scaling(points);
      res.files.push_back({"scaling_fit.json", render_json({{"a", f.a},
                                                            {"b", f.b},
                                                            {"c", f.c},
                                                            {"asymptote", f.asymptote},
                                                            {"residual", f.residual_norm},
                                                            {"data_norm", f.data_norm},
                                                            {"iterations", f.iterations},
                                                            {"n_points", points.size()}})});
    } catch (const FitFailure &e) {
      warn(std::string("scaling fit failed: ") + e.what());
    }
  } else {
    warn("scaling fit skipped: needs at least 4 points with N >= 3");
  }
  res.timings.emplace_back("scale", clock.seconds());
  return res;
}

AmplitudePoint characterize_drive(const CouplerSpec &spec) {
  AmplitudePoint a;
  a.delta_phi = spec.delta_phi;
  a.predicted = effective_coupling(spec);
  const double w = std::abs(a.predicted);
  if (!(w > 0.0)) throw DegenerateInputError("effective coupling vanishes; no exchange to characterize");
  const double center = dressed_sum_frequency(spec);
  const double half = 3.0 * w, window = 1.2 * kPi / w;
  constexpr int kCoarse = 41;
  std::vector<double> grid(kCoarse);
  for (int i = 0; i < kCoarse; ++i) grid[static_cast<std::size_t>(i)] = center - half + 2.0 * half * i / (kCoarse - 1);
  const ResonanceScan coarse = resonance_scan(spec, grid, window);
  const std::size_t k = coarse.peak_index;
  const ResonancePoint r = find_resonance(spec, grid[k == 0 ? 0 : k - 1], grid[std::min<std::size_t>(k + 1, kCoarse - 1)],
                                          window, 1e-6 * w);
  a.resonance = r.omega_phi;
  a.peak_transfer = r.transfer;

  CouplerSpec s = spec;
  s.omega_phi = r.omega_phi;
  const double period = 2.0 * kPi / r.omega_phi;
  const int n_periods = static_cast<int>(std::ceil(2.5 * kPi / w / period));
  const DeviceTrace tr = stroboscopic_evolution(s, n_periods);
  std::vector<double> series;
  series.reserve(tr.populations.size());
  for (const auto &p : tr.populations) {
    series.push_back(both_excited(p));
    a.max_leakage = std::max(a.max_leakage, single_excited(p));
  }
  a.extracted = extract_oscillation_frequency(tr.times, series);
  return a;
}

namespace {

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

LinearFit linear_fit(const std::vector<double> &x, const std::vector<double> &y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  const double mean = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(y[i] - (f.slope * x[i] + f.intercept), 2);
    ss_tot += std::pow(y[i] - mean, 2);
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

} // namespace

CommandResult cmd_device(const ExperimentConfig &cfg, const RunOptions &run) {
  if (!cfg.device) throw ConfigError("/device", "missing");
  const DeviceConfig &dc = *cfg.device;
  const double scale = dc.frequency_scale;
  const CouplerSpec sim = dc.coupler.scaled(scale);
  if (sim.delta_phi == 0.0) throw ConfigError("/device/coupler/delta_phi", "must be nonzero for a drive characterization");
  Stopwatch clock;
  CommandResult res;

  const double omega = effective_coupling(sim);
  const double center = dressed_sum_frequency(sim);
  const double half = dc.scan_half_width * std::abs(omega);
  const double window = dc.duration_us ? *dc.duration_us * scale : 1.2 * kPi / std::abs(omega);
  std::vector<double> grid(static_cast<std::size_t>(dc.scan_points));
  for (int i = 0; i < dc.scan_points; ++i) {
    grid[static_cast<std::size_t>(i)] = center - half + 2.0 * half * i / (dc.scan_points - 1);
  }
  const ResonanceScan scan = resonance_scan(sim, grid, window, run.threads);
  {
    CsvTable t;
    t.columns = {"omega_phi_rad_per_us", "detuning_rad_per_us", "transfer"};
    for (const auto &p : scan.points) t.add_row({p.omega_phi / scale, (p.omega_phi - center) / scale, p.transfer});
    res.files.push_back({"resonance_scan.csv", render_csv(t)});
  }
  res.timings.emplace_back("resonance_scan", clock.seconds());

  std::vector<double> amplitudes = dc.amplitudes;
  if (amplitudes.empty()) {
    for (double f : {0.5, 0.75, 1.0, 1.25, 1.5}) amplitudes.push_back(f * sim.delta_phi);
  }
  for (double a : amplitudes) {
    if (!(std::abs(a) < 0.5)) throw ConfigError("/device/coupler/delta_phi", "default amplitude grid leaves |delta_phi| < 0.5");
  }
  Stopwatch amp_clock;
  const auto points = parallel_map(amplitudes.size(), run.threads, [&](std::size_t i) {
    CouplerSpec s = sim;
    s.delta_phi = amplitudes[i];
    return characterize_drive(s);
  });
  std::vector<double> xs, ys, ps;
  {
    CsvTable t;
    t.columns = {"delta_phi",      "omega_eff_predicted", "omega_eff_extracted", "ratio",
                 "resonance_omega_phi", "peak_transfer", "max_leakage"};
    for (const auto &p : points) {
      t.add_row({p.delta_phi, p.predicted / scale, p.extracted / scale, p.extracted / std::abs(p.predicted),
                 p.resonance / scale, p.peak_transfer, p.max_leakage});
      xs.push_back(std::abs(p.delta_phi));
      ys.push_back(p.extracted / scale);
      ps.push_back(std::abs(p.predicted) / scale);
    }
    res.files.push_back({"amplitude_scan.csv", render_csv(t)});
  }
  res.timings.emplace_back("amplitude_scan", amp_clock.seconds());

  const LinearFit measured = linear_fit(xs, ys), predicted = linear_fit(xs, ps);
  const ResonancePoint &peak = scan.points[scan.peak_index];
  const nlohmann::json report = {
      {"frequency_scale", scale},
      {"omega_eff_rad_per_us", omega / scale},
      {"coupler_frequency_rad_per_us", coupler_frequency(dc.coupler, dc.coupler.phi_dc)},
      {"dressed_sum_rad_per_us", center / scale},
      {"scan_peak", {{"omega_phi_rad_per_us", peak.omega_phi / scale}, {"transfer", peak.transfer},
                     {"fwhm_rad_per_us", scan.peak_width / scale}}},
      {"amplitude_fit", {{"slope_extracted", measured.slope}, {"intercept_extracted", measured.intercept},
                         {"r_squared", measured.r_squared}, {"slope_predicted", predicted.slope}}}};
  res.files.push_back({"effective_coupling.json", render_json(report)});
  res.timings.emplace_back("device", clock.seconds());
  return res;
}

CommandResult cmd_readout(const ExperimentConfig &cfg, const RunOptions &run) {
  if (!cfg.readout) throw ConfigError("/readout", "missing");
  const ReadoutConfig &rc = *cfg.readout;
  Stopwatch clock;
  const ReadoutModel model = build_readout_model(rc.fidelities);
  const auto dim = static_cast<Eigen::Index>(model.dim());

  // Interior test distribution: half uniform, half a flat Dirichlet draw.
  std::mt19937_64 rng(derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::readout_populations)));
  std::exponential_distribution<double> expo(1.0);
  RVector ideal(dim);
  for (Eigen::Index i = 0; i < dim; ++i) ideal(i) = expo(rng);
  ideal = 0.5 * ideal / ideal.sum() + RVector::Constant(dim, 0.5 / static_cast<double>(dim));
  ideal /= ideal.sum();

  const RVector noisy = apply_noise(model, ideal);
  const RVector recovered = mitigate(model, noisy);
  const double noiseless_error = (recovered - ideal).cwiseAbs().maxCoeff();

  const auto counts = sample_counts(noisy, rc.shots, derive_seed(run.seed, static_cast<std::uint64_t>(SeedStream::readout_shots)));
  const RVector freq = frequencies_from_counts(counts);
  const RVector estimate = unbiased_inverse(model, freq);
  const RVector sigma = inverse_standard_error(model, freq, rc.shots);
  double max_z = 0.0;
  Eigen::Index within = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double err = std::abs(estimate(i) - ideal(i));
    const double z = sigma(i) > 0.0 ? err / sigma(i) : (err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    max_z = std::max(max_z, z);
    if (z <= 3.0) ++within;
  }
  const RVector mitigated = mitigate(model, freq);

  auto vec = [](const RVector &v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json matrices = nlohmann::json::array();
  bool identity = true;
  for (const auto &a : model.response) {
    matrices.push_back({{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}});
    identity = identity && a.isIdentity(0.0);
  }
  const nlohmann::json report = {
      {"n_qubits", model.n_qubits()},
      {"shots", rc.shots},
      {"response_matrices", matrices},
      {"identity", identity},
      {"ideal", vec(ideal)},
      {"noisy", vec(noisy)},
      {"noiseless_max_error", noiseless_error},
      {"sampled",
       {{"mitigated", vec(mitigated)},
        {"unbiased_estimate", vec(estimate)},
        {"standard_error", vec(sigma)},
        {"max_abs_error", (mitigated - ideal).cwiseAbs().maxCoeff()},
        {"max_z", max_z},
        {"fraction_within_3sigma", static_cast<double>(within) / static_cast<double>(dim)},
        {"within_3sigma", within == dim}}}};
  CommandResult res;
  res.files.push_back({"mitigation_report.json", render_json(report)});
  res.timings.emplace_back("readout", clock.seconds());
  return res;
}

CommandResult cmd_entropy(const ExperimentConfig &cfg, const RunOptions &run) {
  const BatteryConfig &bat = require_battery(cfg);
  const AnalysisConfig &an = cfg.analysis;
  const double dt = an.entropy_dt_us;
  const bool include_h0 = run.include_h0 || an.include_h0;
  Stopwatch clock;
  struct Job {
    int n;
    ChargingKind kind;
  };
  std::vector<Job> jobs;
  for (int n : bat.cell_counts()) {
    if (n < 2 || n > 12) throw ConfigError("/battery", "entropy needs 2..12 cells");
    for (ChargingKind k : bat.kinds) jobs.push_back({n, k});
  }
  struct Result {
    EntropyGrowthReport report;
    std::vector<std::optional<SampledPurity>> sampled;
    std::vector<double> sampled_initial;
  };
  auto results = parallel_map(jobs.size(), run.threads, [&](std::size_t j) {
    const auto [n, kind] = jobs[j];
    const BatteryParams p = bat.params(n);
    std::optional<QuantumState> final_state;
    dispatch_evolution(
        p, kind, {0.0, dt}, cfg.lindblad(n), include_h0,
        [&](std::size_t i, double, const CVector &psi) {
          if (i == 1) final_state = QuantumState::pure(psi);
          return true;
        },
        [&](std::size_t i, double, const CMatrix &rho) {
          if (i == 1) final_state = QuantumState::unchecked_mixed(rho);
          return true;
        });
    Result r{entropy_growth(QuantumState::ground(n), *final_state, dt), {}, {}};
    if (an.sampled_unitaries > 0) {
      for (int na = 1; na < n; ++na) {
        Bipartition part{n, {}};
        for (int k = 0; k < na; ++k) part.subset.push_back(k);
        if (na > 6) {
          r.sampled.emplace_back(std::nullopt);
          continue;
        }
        const std::uint64_t stream = derive_seed(static_cast<std::uint64_t>(SeedStream::sampled_purity),
                                                 (static_cast<std::uint64_t>(j) << 8) | static_cast<std::uint64_t>(na));
        r.sampled.push_back(sampled_purity(*final_state, part, an.sampled_unitaries, an.sampled_shots,
                                           derive_seed(run.seed, stream)));
      }
    }
    return r;
  });

  CommandResult res;
  for (ChargingKind kind : bat.kinds) {
    CsvTable t;
    t.columns = {"n_cells",         "n_a",           "delta_sigma", "renyi2_sampled", "renyi2_sampled_corrected",
                 "purity_sampled", "purity_sampled_std_error"};
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].kind != kind) continue;
      const int n = jobs[j].n;
      const Result &r = results[j];
      for (int na = 1; na < n; ++na) {
        const double s = r.report.per_size[static_cast<std::size_t>(na - 1)];
        Cell est, err, renyi, corrected;
        if (!r.sampled.empty() && r.sampled[static_cast<std::size_t>(na - 1)]) {
          const SampledPurity &sp = *r.sampled[static_cast<std::size_t>(na - 1)];
          est = sp.estimate;
          err = sp.std_error;
          // Sampled entropies carry the uniform background that the correction removes.
          if (sp.estimate > 0.0) {
            renyi = std::max(0.0, -std::log(std::min(1.0, sp.estimate)));
            corrected = noise_correct(*renyi, na, n);
          }
        }
        t.add_row({static_cast<double>(n), static_cast<double>(na), s, renyi, corrected, est, err});
      }
    }
    res.files.push_back({"entropy_" + to_string(kind) + ".csv", render_csv(t)});
  }
  CsvTable summary;
  summary.columns = {"n_cells", "kind_quantum", "delta_sigma_average", "dt_us"};
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    summary.add_row({static_cast<double>(jobs[j].n), jobs[j].kind == ChargingKind::quantum ? 1.0 : 0.0,
                     results[j].report.average, results[j].report.dt_used});
  }
  res.files.push_back({"entropy_summary.csv", render_csv(summary)});
  res.timings.emplace_back("entropy", clock.seconds());
  return res;
}

} // namespace qbatt
