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

#include "qbatt/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qbatt/errors.hpp"

namespace qbatt {

using nlohmann::json;

double mhz_to_rad_per_us(double mhz) { return 2.0 * std::numbers::pi * mhz; }

namespace {

// Reads one JSON object, records consumed keys and rejects the rest.
class Section {
public:
  Section(const json &node, std::string pointer) : node_(node), ptr_(std::move(pointer)) {
    if (!node_.is_object()) throw ConfigError(where(), "expected an object");
  }

  std::string where(const std::string &key = {}) const {
    if (key.empty()) return ptr_.empty() ? "/" : ptr_;
    return ptr_ + "/" + key;
  }

  bool has(const std::string &key) const { return node_.contains(key); }

  const json &raw(const std::string &key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ConfigError(where(key), "missing");
    return node_.at(key);
  }

  double number(const std::string &key) {
    const json &v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where(key), "expected a finite number");
    return x;
  }

  double number_or(const std::string &key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string &key) {
    const double x = number(key);
    if (!(x > 0.0)) throw ConfigError(where(key), "must be positive");
    return x;
  }

  int integer(const std::string &key) {
    const json &v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string &key) {
    const json &v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(where(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean_or(const std::string &key, bool fallback) {
    if (!has(key)) return fallback;
    const json &v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string &key) {
    const json &v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string &key) {
    const json &v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(where(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // Frequency given as `<stem>_mhz` or `<stem>_rad_per_us`; exactly one allowed.
  std::optional<double> frequency(const std::string &stem) {
    const bool mhz = has(stem + "_mhz"), rad = has(stem + "_rad_per_us");
    if (mhz && rad) throw ConfigError(where(stem + "_mhz"), "give either " + stem + "_mhz or " + stem + "_rad_per_us");
    if (mhz) return mhz_to_rad_per_us(number(stem + "_mhz"));
    if (rad) return number(stem + "_rad_per_us");
    return std::nullopt;
  }

  double required_frequency(const std::string &stem) {
    auto f = frequency(stem);
    if (!f) throw ConfigError(where(stem + "_mhz"), "missing (or " + stem + "_rad_per_us)");
    return *f;
  }

  std::optional<std::vector<double>> frequencies(const std::string &stem) {
    const bool mhz = has(stem + "_mhz"), rad = has(stem + "_rad_per_us");
    if (mhz && rad) throw ConfigError(where(stem + "_mhz"), "give either " + stem + "_mhz or " + stem + "_rad_per_us");
    if (mhz) {
      auto v = numbers(stem + "_mhz");
      for (double &x : v) x = mhz_to_rad_per_us(x);
      return v;
    }
    if (rad) return numbers(stem + "_rad_per_us");
    return std::nullopt;
  }

  void finish() const {
    for (const auto &item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where(item.key()), "unknown key");
    }
  }

private:
  const json &node_;
  std::string ptr_;
  std::set<std::string> seen_;
};

// Rethrows library validation errors with the section pointer attached.
template <class F> void checked(const std::string &pointer, F &&f) {
  try {
    f();
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(pointer, e.what());
  }
}

BatteryConfig parse_battery(const json &node) {
  Section s(node, "/battery");
  BatteryConfig b;
  if (s.has("n_cells")) b.n_cells = s.integer("n_cells");
  if (s.has("n_range")) {
    const auto r = s.numbers("n_range");
    if (r.size() != 2 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]) || r[0] > r[1]) {
      throw ConfigError(s.where("n_range"), "expected [n_min, n_max] with integer n_min <= n_max");
    }
    b.n_range = std::make_pair(static_cast<int>(r[0]), static_cast<int>(r[1]));
  }
  if (b.n_cells.has_value() == b.n_range.has_value()) {
    throw ConfigError(s.where("n_cells"), "give exactly one of n_cells and n_range");
  }
  for (int n : b.cell_counts()) {
    if (n < 1 || n > 21) throw ConfigError(s.where(b.n_cells ? "n_cells" : "n_range"), "cell counts must lie in 1..21");
  }
  b.omega0 = s.frequency("omega0").value_or(1.0);
  if (!(b.omega0 > 0.0)) throw ConfigError(s.where("omega0_rad_per_us"), "must be positive");
  b.g = s.frequency("g");
  if (auto bonds = s.frequencies("bonds")) b.bonds = *bonds;
  if (b.g && !b.bonds.empty()) throw ConfigError(s.where("bonds_mhz"), "give either g or bonds, not both");
  if (!b.g && b.bonds.empty()) throw ConfigError(s.where("g_mhz"), "missing coupling (g or bonds)");
  if (b.g && !(*b.g > 0.0)) throw ConfigError(s.where("g_mhz"), "must be positive");
  if (!b.bonds.empty()) {
    if (b.n_range || static_cast<int>(b.bonds.size()) != *b.n_cells - 1) {
      throw ConfigError(s.where("bonds_mhz"), "needs n_cells set and exactly n_cells - 1 entries");
    }
  }
  if (s.has("alpha")) b.alpha = s.number("alpha");
  b.Omega = s.frequency("Omega");
  if (s.has("alpha_range")) {
    Section r(s.raw("alpha_range"), s.where("alpha_range"));
    const double start = r.number("start"), stop = r.number("stop"), step = r.positive("step");
    r.finish();
    if (stop < start) throw ConfigError(r.where("stop"), "must not be below start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) b.alpha_values.push_back(start + static_cast<double>(i) * step);
  }
  if (static_cast<int>(b.alpha.has_value()) + static_cast<int>(b.Omega.has_value()) > 1) {
    throw ConfigError(s.where("alpha"), "give either alpha or Omega");
  }
  if (!b.alpha && !b.Omega && b.alpha_values.empty()) throw ConfigError(s.where("alpha"), "missing (or Omega, alpha_range)");
  if (b.alpha && *b.alpha < 0.0) throw ConfigError(s.where("alpha"), "must be nonnegative");
  for (double a : b.alpha_values) {
    if (a < 0.0) throw ConfigError(s.where("alpha_range"), "alpha values must be nonnegative");
  }
  if (s.has("kinds")) {
    const json &k = s.raw("kinds");
    if (!k.is_array() || k.empty()) throw ConfigError(s.where("kinds"), "expected a nonempty array");
    b.kinds.clear();
    for (std::size_t i = 0; i < k.size(); ++i) {
      const std::string p = s.where("kinds") + "/" + std::to_string(i);
      if (!k[i].is_string()) throw ConfigError(p, "expected \"classical\" or \"quantum\"");
      checked(p, [&] { b.kinds.push_back(charging_kind_from_string(k[i].get<std::string>())); });
    }
  }
  s.finish();
  for (int n : b.cell_counts()) {
    checked("/battery", [&] { b.params(n).validate(); });
  }
  return b;
}

DecoherenceConfig parse_decoherence(const json &node) {
  Section s(node, "/decoherence");
  DecoherenceConfig d;
  const std::string source = s.string("source");
  if (source == "none") {
    d.source = DecoherenceSource::none;
  } else if (source == "table") {
    d.source = DecoherenceSource::table;
  } else if (source == "uniform") {
    d.source = DecoherenceSource::uniform;
    d.t1_us = s.positive("T1_us");
    d.t2_us = s.positive("T2_us");
    checked(s.where(), [&] { rates_from_times(d.t1_us, d.t2_us); });
  } else {
    throw ConfigError(s.where("source"), "expected \"none\", \"table\" or \"uniform\"");
  }
  s.finish();
  return d;
}

TimeGridConfig parse_time(const json &node) {
  Section s(node, "/time");
  TimeGridConfig t;
  t.t_max_us = s.positive("t_max_us");
  t.step_us = s.positive("step_us");
  s.finish();
  if (t.step_us > t.t_max_us) throw ConfigError(s.where("step_us"), "exceeds t_max_us");
  if (t.t_max_us / t.step_us > 1e7) throw ConfigError(s.where("step_us"), "grid would exceed 1e7 points");
  return t;
}

AnalysisConfig parse_analysis(const json &node) {
  Section s(node, "/analysis");
  AnalysisConfig a;
  a.g2 = s.boolean_or("g2", a.g2);
  a.split_ergotropy = s.boolean_or("split_ergotropy", a.split_ergotropy);
  a.bounds = s.boolean_or("bounds", a.bounds);
  a.entropy = s.boolean_or("entropy", a.entropy);
  a.include_h0 = s.boolean_or("include_h0", a.include_h0);
  if (s.has("entropy_dt_us")) a.entropy_dt_us = s.positive("entropy_dt_us");
  if (s.has("power_step_us")) a.power_step_us = s.positive("power_step_us");
  if (s.has("sampled_unitaries")) a.sampled_unitaries = s.integer("sampled_unitaries");
  if (s.has("sampled_shots")) a.sampled_shots = s.integer("sampled_shots");
  if (a.sampled_unitaries < 0 || a.sampled_shots < 0 || (a.sampled_unitaries > 0) != (a.sampled_shots > 0)) {
    throw ConfigError(s.where("sampled_unitaries"), "sampled_unitaries and sampled_shots must both be positive or both 0");
  }
  if (a.sampled_shots == 1) throw ConfigError(s.where("sampled_shots"), "needs at least two shots");
  s.finish();
  return a;
}

DeviceConfig parse_device(const json &node) {
  Section s(node, "/device");
  DeviceConfig d;
  {
    Section c(s.raw("coupler"), s.where("coupler"));
    CouplerSpec &k = d.coupler;
    k.omega_q1 = c.required_frequency("omega_q1");
    k.omega_q2 = c.required_frequency("omega_q2");
    k.omega_c_max = c.required_frequency("omega_c_max");
    k.g1 = c.required_frequency("g1");
    k.g2 = c.required_frequency("g2");
    k.omega_phi = c.frequency("omega_phi").value_or(0.0);
    k.d = c.number("d");
    k.phi_dc = c.number("phi_dc");
    k.delta_phi = c.number("delta_phi");
    k.phi0_phase = c.number_or("phi0_phase", 0.0);
    c.finish();
    checked(c.where(), [&] { k.validate(); });
  }
  if (s.has("frequency_scale")) d.frequency_scale = s.positive("frequency_scale");
  if (s.has("scan_points")) d.scan_points = s.integer("scan_points");
  if (d.scan_points < 3) throw ConfigError(s.where("scan_points"), "needs at least 3 points");
  if (s.has("scan_half_width")) d.scan_half_width = s.positive("scan_half_width");
  if (s.has("amplitudes")) d.amplitudes = s.numbers("amplitudes");
  for (double a : d.amplitudes) {
    if (!(std::abs(a) < 0.5) || a == 0.0) throw ConfigError(s.where("amplitudes"), "amplitudes must satisfy 0 < |delta_phi| < 0.5");
  }
  if (s.has("duration_us")) d.duration_us = s.positive("duration_us");
  s.finish();
  return d;
}

ReadoutConfig parse_readout(const json &node, const DeviceTable &table) {
  Section s(node, "/readout");
  ReadoutConfig r;
  const bool explicit_list = s.has("fidelities"), from_table = s.has("table_qubits");
  if (explicit_list == from_table) throw ConfigError(s.where("fidelities"), "give exactly one of fidelities and table_qubits");
  if (explicit_list) {
    const json &list = s.raw("fidelities");
    if (!list.is_array() || list.empty()) throw ConfigError(s.where("fidelities"), "expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section q(list[i], s.where("fidelities") + "/" + std::to_string(i));
      r.fidelities.push_back({q.number("f0"), q.number("f1")});
      q.finish();
    }
  } else {
    const int n = s.integer("table_qubits");
    checked(s.where("table_qubits"), [&] { r.fidelities = table.fidelities(n); });
  }
  if (s.has("shots")) r.shots = s.unsigned_integer("shots");
  if (r.shots == 0) throw ConfigError(s.where("shots"), "must be positive");
  s.finish();
  checked(s.where(), [&] { build_readout_model(r.fidelities); });
  return r;
}

DeviceTable parse_device_table(const json &node) {
  Section s(node, "/device_table");
  DeviceTable t;
  t.mean_coupling_mhz = s.positive("mean_coupling_mhz");
  const json &list = s.raw("qubits");
  if (!list.is_array() || list.empty()) throw ConfigError(s.where("qubits"), "expected a nonempty array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section q(list[i], s.where("qubits") + "/" + std::to_string(i));
    QubitCalibration c;
    c.name = q.string("name");
    c.idle_frequency_ghz = q.number("idle_frequency_ghz");
    c.anharmonicity_mhz = q.number("anharmonicity_mhz");
    c.resonator_frequency_ghz = q.number("resonator_frequency_ghz");
    c.resonator_linewidth_mhz = q.number("resonator_linewidth_mhz");
    c.dispersive_shift_mhz = q.number("dispersive_shift_mhz");
    c.readout_f0 = q.number("readout_f0_percent") / 100.0;
    c.readout_f1 = q.number("readout_f1_percent") / 100.0;
    c.t1_us = q.number("t1_us");
    c.t2_ramsey_us = q.number("t2_ramsey_us");
    c.t2_echo_us = q.number("t2_echo_us");
    q.finish();
    t.qubits.push_back(std::move(c));
  }
  s.finish();
  checked(s.where(), [&] { t.validate(); });
  return t;
}

} // namespace

std::vector<int> BatteryConfig::cell_counts() const {
  std::vector<int> out;
  if (n_cells) {
    out.push_back(*n_cells);
  } else if (n_range) {
    for (int n = n_range->first; n <= n_range->second; ++n) out.push_back(n);
  }
  return out;
}

BatteryParams BatteryConfig::params(int n, std::optional<double> alpha_override) const {
  const double mean_g = bonds.empty() ? g.value_or(0.0) : [&] {
    double s = 0.0;
    for (double x : bonds) s += x;
    return s / static_cast<double>(bonds.size());
  }();
  double a = 0.0;
  if (alpha_override) {
    a = *alpha_override;
  } else if (alpha) {
    a = *alpha;
  } else if (Omega) {
    a = *Omega / mean_g;
  } else if (!alpha_values.empty()) {
    a = alpha_values.front();
  }
  if (!bonds.empty() && n >= 2) return BatteryParams::with_bonds(std::vector<double>(static_cast<std::size_t>(n), omega0), bonds, a);
  BatteryParams p = BatteryParams::uniform(n, omega0, mean_g, a);
  if (Omega && !alpha_override && !alpha) p.Omega = *Omega;
  return p;
}

std::optional<LindbladSpec> ExperimentConfig::lindblad(int n_cells) const {
  switch (decoherence.source) {
  case DecoherenceSource::none:
    return std::nullopt;
  case DecoherenceSource::table:
    return device_table.lindblad(n_cells);
  case DecoherenceSource::uniform: {
    const DecayRates r = rates_from_times(decoherence.t1_us, decoherence.t2_us);
    return LindbladSpec::uniform(n_cells, r.gamma_minus, r.gamma_z);
  }
  }
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "line " << line << ", column " << column << ": malformed JSON";
    throw ConfigError("", msg.str());
  }
  Section root(doc, "");
  ExperimentConfig cfg;
  if (root.has("device_table")) cfg.device_table = parse_device_table(root.raw("device_table"));
  if (root.has("schema")) {
    if (root.string("schema") != "qbatt-config v1") throw ConfigError("/schema", "expected \"qbatt-config v1\"");
  }
  if (root.has("battery")) cfg.battery = parse_battery(root.raw("battery"));
  if (root.has("decoherence")) cfg.decoherence = parse_decoherence(root.raw("decoherence"));
  if (root.has("time")) cfg.time = parse_time(root.raw("time"));
  if (root.has("analysis")) cfg.analysis = parse_analysis(root.raw("analysis"));
  if (root.has("device")) cfg.device = parse_device(root.raw("device"));
  if (root.has("readout")) cfg.readout = parse_readout(root.raw("readout"), cfg.device_table);
  if (root.has("output")) cfg.output = root.string("output");
  if (root.has("seed")) cfg.seed = root.unsigned_integer("seed");
  root.finish();
  if (cfg.decoherence.source != DecoherenceSource::none && cfg.battery) {
    for (int n : cfg.battery->cell_counts()) {
      if (n > 10) throw ConfigError("/decoherence", "open-system runs are limited to 10 cells");
      checked("/decoherence", [&] { cfg.lindblad(n)->validate(n); });
    }
  }
  cfg.document = std::move(doc);
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

} // namespace qbatt
