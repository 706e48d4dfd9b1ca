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

// qbatt: command-line front end. Exit codes: 0 success, 2 invalid
// configuration or arguments, 1 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qbatt/config.hpp"
#include "qbatt/errors.hpp"
#include "qbatt/experiments.hpp"
#include "qbatt/io.hpp"
#include "qbatt/parallel.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Spin-chain quantum battery simulation toolkit", "qbatt"};
  app.set_version_flag("--version", std::string(QBATT_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool include_h0 = false;
  app.add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config's \"output\")");
  app.add_option("--seed", seed, "Master seed (overrides the config's \"seed\")");
  app.add_option("--threads", threads, "Worker threads (default: QBATT_THREADS, then all cores)")->check(CLI::PositiveNumber);
  app.add_flag("--include-h0", include_h0, "Evolve under H0 + V instead of V alone");

  using Command = qbatt::CommandResult (*)(const qbatt::ExperimentConfig &, const qbatt::RunOptions &);
  Command command = nullptr;
  auto add = [&](const char *name, const char *help, Command fn) {
    app.add_subcommand(name, help)->callback([&command, fn] { command = fn; });
  };
  add("charge", "Charging traces per cell count and charging kind", qbatt::cmd_charge);
  add("sweep-alpha", "Driving-potential ratio and advantage versus alpha", qbatt::cmd_sweep_alpha);
  add("scale", "Optimal power and advantage versus cell count, with arctan fit", qbatt::cmd_scale);
  add("device", "Parametric-drive resonance and amplitude scans", qbatt::cmd_device);
  add("readout", "Readout-error mitigation report", qbatt::cmd_readout);
  add("entropy", "Bipartition Renyi-2 entropy growth", qbatt::cmd_entropy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  qbatt::ExperimentConfig cfg;
  qbatt::RunOptions run;
  try {
    cfg = qbatt::load_config(config_path);
    run.seed = seed.value_or(cfg.seed);
    run.threads = qbatt::resolve_threads(threads);
    run.include_h0 = include_h0;
    if (out_dir.empty()) out_dir = cfg.output;
    if (out_dir.empty()) throw qbatt::ConfigError("/output", "no output directory (use --out)");
  } catch (const qbatt::ConfigError &e) {
    std::cerr << "qbatt: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const qbatt::Error &e) {
    std::cerr << "qbatt: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    const qbatt::CommandResult result = command(cfg, run);
    qbatt::OutputDirectory out(out_dir, qbatt::config_hash(cfg, run.seed));
    for (const auto &f : result.files) out.write(f.name, f.contents);
    for (const auto &[stage, seconds] : result.timings) out.record_timing(stage, seconds);
    out.write_manifest();
  } catch (const qbatt::ConfigError &e) {
    std::cerr << "qbatt: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception &e) {
    std::cerr << "qbatt: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
