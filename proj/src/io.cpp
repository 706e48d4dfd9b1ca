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

#include "qbatt/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <unistd.h>

#include "qbatt/errors.hpp"

namespace qbatt {

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ArgumentError("row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column_index(const std::string &name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ArgumentError("missing column '" + name + "'");
}

std::vector<Cell> CsvTable::column(const std::string &name) const {
  const std::size_t j = column_index(name);
  std::vector<Cell> out;
  out.reserve(rows.size());
  for (const auto &r : rows) out.push_back(r[j]);
  return out;
}

std::string format_number(double x) {
  if (!std::isfinite(x)) throw ArgumentError("cannot write a non-finite number");
  if (x == 0.0) return "0"; // folds -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string csv_field(const std::string &text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string render_csv(const CsvTable &table) {
  std::string out = kSchemaLine;
  out += '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out += ',';
    out += csv_field(table.columns[j]);
  }
  out += '\n';
  for (const auto &row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      if (row[j]) out += format_number(*row[j]);
    }
    out += '\n';
  }
  return out;
}

namespace {

// RFC-4180 record splitter; returns false at end of input.
bool next_record(const std::string &text, std::size_t &pos, std::vector<std::string> &fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          cur += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      break;
    } else {
      cur += c;
    }
  }
  if (quoted) throw ArgumentError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return true;
}

} // namespace

CsvTable parse_csv(const std::string &text) {
  std::size_t pos = 0;
  const std::size_t eol = text.find('\n');
  std::string first = text.substr(0, eol);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first != kSchemaLine) throw ArgumentError("missing or unsupported schema line (expected '" + std::string(kSchemaLine) + "')");
  pos = eol == std::string::npos ? text.size() : eol + 1;
  CsvTable table;
  std::vector<std::string> fields;
  if (!next_record(text, pos, fields) || (fields.size() == 1 && fields[0].empty())) {
    throw ArgumentError("missing header row");
  }
  table.columns = fields;
  std::size_t line = 3;
  while (next_record(text, pos, fields)) {
    if (fields.size() == 1 && fields[0].empty() && pos >= text.size()) break;
    if (fields.size() != table.columns.size()) {
      throw ArgumentError("line " + std::to_string(line) + ": expected " + std::to_string(table.columns.size()) + " fields");
    }
    std::vector<Cell> row;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (fields[j].empty()) {
        row.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      const char *b = fields[j].data(), *e = b + fields[j].size();
      const auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc() || res.ptr != e) {
        throw ArgumentError("line " + std::to_string(line) + ": column '" + table.columns[j] + "' is not numeric");
      }
      row.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
    ++line;
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string render_json(const nlohmann::json &value) { return value.dump(2) + "\n"; }

std::string sha256_hex(const std::string &bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

void write_file_atomic(const std::filesystem::path &path, const std::string &contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename into " + path.string());
  }
}

OutputDirectory::OutputDirectory(std::filesystem::path dir, std::string config_hash)
    : dir_(std::move(dir)), config_hash_(std::move(config_hash)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void OutputDirectory::write(const std::string &name, const std::string &contents) {
  write_file_atomic(dir_ / name, contents);
  files_.push_back({name, sha256_hex(contents), contents.size()});
}

void OutputDirectory::record_timing(const std::string &stage, double seconds) { timings_.emplace_back(stage, seconds); }

nlohmann::json OutputDirectory::manifest() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto &f : files_) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  nlohmann::json timings = nlohmann::json::object();
  for (const auto &[stage, s] : timings_) timings[stage] = s;
  return {{"schema", "qbatt-manifest v1"},
          {"toolkit_version", QBATT_VERSION},
          {"config_sha256", config_hash_},
          {"files", files},
          {"wall_clock_seconds", timings}};
}

void OutputDirectory::write_manifest() { write_file_atomic(dir_ / "manifest.json", render_json(manifest())); }

} // namespace qbatt
