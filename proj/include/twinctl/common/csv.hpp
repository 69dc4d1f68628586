// Copyright 2026 The twinctl Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twinctl/common/transient.hpp"

namespace twinctl {

/// Decimal text with 17 significant digits; parses back to the same double.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] double parse_double(const std::string& text);

/// Simple rectangular table with a header row, written as RFC-4180-ish CSV
/// (no quoting: cell values must not contain commas or newlines).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    void add_numeric_row(const std::vector<double>& values);
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] std::string to_csv_string(const CsvTable& table);

/// Transient CSV: column `time_s` first, then one column per variable.
void write_transient_csv(const std::filesystem::path& path, const Transient& transient);
[[nodiscard]] Transient read_transient_csv(const std::filesystem::path& path);

} // namespace twinctl
