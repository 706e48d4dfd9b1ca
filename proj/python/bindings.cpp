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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbatt/battery.hpp"
#include "qbatt/config.hpp"
#include "qbatt/device.hpp"
#include "qbatt/entanglement.hpp"
#include "qbatt/ergotropy.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/experiments.hpp"
#include "qbatt/io.hpp"
#include "qbatt/readout.hpp"

namespace py = pybind11;
using namespace qbatt;

namespace {

BatteryParams make_params(int n_cells, double g, double alpha, double omega0) {
  return BatteryParams::uniform(n_cells, omega0, g, alpha);
}

ChargingKind kind_of(const std::string &name) { return charging_kind_from_string(name); }

py::dict charge(int n_cells, double g, double alpha, const std::string &kind, double t_max, double step, double omega0,
                bool split) {
  ChargingOptions o;
  o.times = uniform_grid(t_max, step);
  o.split = split;
  o.g2 = n_cells >= 2;
  o.keep_populations = true;
  ChargingRun r;
  {
    py::gil_scoped_release release;
    r = run_charging(make_params(n_cells, g, alpha, omega0), kind_of(kind), o);
  }
  py::dict out;
  out["t_us"] = r.times;
  out["energy"] = r.energy;
  out["ergotropy"] = r.ergotropy;
  out["ergotropy_inco"] = r.incoherent;
  out["ergotropy_cohe"] = r.coherent;
  out["g2"] = r.g2;
  out["populations"] = r.populations;
  out["dt_max"] = r.optimal.dt_max;
  out["p_opt"] = r.optimal.p_opt;
  return out;
}

py::dict run_command(const std::string &name, const std::string &config_text, std::uint64_t seed, int threads,
                     bool include_h0) {
  const ExperimentConfig cfg = parse_config(config_text);
  RunOptions run{seed, threads, include_h0};
  CommandResult res;
  {
    py::gil_scoped_release release;
    if (name == "charge") {
      res = cmd_charge(cfg, run);
    } else if (name == "sweep-alpha") {
      res = cmd_sweep_alpha(cfg, run);
    } else if (name == "scale") {
      res = cmd_scale(cfg, run);
    } else if (name == "device") {
      res = cmd_device(cfg, run);
    } else if (name == "readout") {
      res = cmd_readout(cfg, run);
    } else if (name == "entropy") {
      res = cmd_entropy(cfg, run);
    } else {
      throw ArgumentError("unknown command '" + name + "'");
    }
  }
  py::dict files;
  for (const auto &f : res.files) files[py::str(f.name)] = py::bytes(f.contents);
  return files;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spin-chain quantum battery simulation core.";
  m.attr("__version__") = QBATT_VERSION;

  py::register_exception<Error>(m, "QbattError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("eta", [](int n, double g, double alpha) { return eta(make_params(n, g, alpha, 1.0)); }, py::arg("n_cells"),
        py::arg("g"), py::arg("alpha"));
  m.def("fair_alpha", [](int n) { return fair_alpha(n); }, py::arg("n_cells"));
  m.def(
      "driving_potential",
      [](int n, double g, double alpha, const std::string &kind) {
        const BatteryParams p = make_params(n, g, alpha, 1.0);
        return driving_potential(chain_V(p, kind_of(kind)), kind_of(kind)).v_dv;
      },
      py::arg("n_cells"), py::arg("g"), py::arg("alpha"), py::arg("kind"));
  m.def("charge", &charge, py::arg("n_cells"), py::arg("g"), py::arg("alpha"), py::arg("kind"), py::arg("t_max") = 1.0,
        py::arg("step") = 0.002, py::arg("omega0") = 1.0, py::arg("split") = true,
        "Closed-system charging from the all-ground state.");

  m.def(
      "ergotropy",
      [](const CMatrix &rho, const Eigen::VectorXd &energies) {
        const ManyBodyOperator H0 = ManyBodyOperator::diagonal(energies);
        const ErgotropyReport r = ergotropy_split(QuantumState::mixed(rho), H0);
        return py::dict(py::arg("total") = r.total, py::arg("incoherent") = r.incoherent,
                        py::arg("coherent") = r.coherent, py::arg("internal_energy") = r.internal_energy);
      },
      py::arg("rho"), py::arg("energies"), "Ergotropy split of a density matrix for a diagonal H0.");
  m.def(
      "renyi2",
      [](const CVector &psi, const std::vector<int> &subset) {
        const QuantumState s = QuantumState::pure(psi);
        return renyi2(s, Bipartition{s.n_sites(), subset});
      },
      py::arg("psi"), py::arg("subset"));

  m.def(
      "effective_coupling",
      [](double omega_q1, double omega_q2, double omega_c_max, double d, double g1, double g2, double phi_dc,
         double delta_phi) {
        CouplerSpec s{omega_q1, omega_q2, omega_c_max, d, g1, g2, phi_dc, delta_phi, 0.0, 0.0};
        return effective_coupling(s);
      },
      py::arg("omega_q1"), py::arg("omega_q2"), py::arg("omega_c_max"), py::arg("d"), py::arg("g1"), py::arg("g2"),
      py::arg("phi_dc"), py::arg("delta_phi"));

  m.def(
      "readout_roundtrip",
      [](const std::vector<std::pair<double, double>> &fidelities, const Eigen::VectorXd &ideal) {
        std::vector<QubitFidelity> f;
        for (auto [f0, f1] : fidelities) f.push_back({f0, f1});
        const ReadoutModel model = build_readout_model(f);
        const RVector noisy = apply_noise(model, ideal);
        return std::make_pair(noisy, mitigate(model, noisy));
      },
      py::arg("fidelities"), py::arg("ideal"), "Returns (noisy, mitigated) for an ideal distribution.");

  m.def("run_command", &run_command, py::arg("name"), py::arg("config"), py::arg("seed") = 0,
        py::arg("threads") = 1, py::arg("include_h0") = false,
        "Runs a CLI subcommand in memory and returns {file name: contents}.");
  m.def(
      "parse_csv",
      [](const std::string &text) {
        const CsvTable t = parse_csv(text);
        py::dict cols;
        for (std::size_t j = 0; j < t.columns.size(); ++j) cols[py::str(t.columns[j])] = t.column(t.columns[j]);
        return cols;
      },
      py::arg("text"));
}
