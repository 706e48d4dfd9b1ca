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

// Output formats. Every CSV starts with the line `# qbatt-schema v1`, then a
// header row; numbers use the shortest round-trip form, nulls are empty fields.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qbatt {

inline constexpr const char *kSchemaLine = "# qbatt-schema v1";

using Cell = std::optional<double>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string &name) const; // throws ArgumentError naming the column
  std::vector<Cell> column(const std::string &name) const;
};

std::string format_number(double x);
std::string csv_field(const std::string &text);
std::string render_csv(const CsvTable &table);
// Throws ArgumentError on a missing schema line, ragged rows or non-numeric cells.
CsvTable parse_csv(const std::string &text);
CsvTable read_csv(const std::filesystem::path &path);

// Stable JSON text: sorted keys, two-space indent, trailing newline.
std::string render_json(const nlohmann::json &value);

std::string sha256_hex(const std::string &bytes);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

// Collects output files for one run and emits manifest.json next to them.
class OutputDirectory {
public:
  OutputDirectory(std::filesystem::path dir, std::string config_hash);

  const std::filesystem::path &path() const { return dir_; }
  void write(const std::string &name, const std::string &contents);
  void write_csv(const std::string &name, const CsvTable &table) { write(name, render_csv(table)); }
  void write_json(const std::string &name, const nlohmann::json &value) { write(name, render_json(value)); }
  void record_timing(const std::string &stage, double seconds);
  nlohmann::json manifest() const;
  void write_manifest();

private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
  };
  std::filesystem::path dir_;
  std::string config_hash_;
  std::vector<Entry> files_;
  std::vector<std::pair<std::string, double>> timings_;
};

} // namespace qbatt
