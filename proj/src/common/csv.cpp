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

#include "twinctl/common/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl {

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') {
            cell.pop_back();
        }
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

std::string format_double(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_double(const std::string& text)
{
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        if (!(errno == ERANGE && v == 0.0)) {
            throw ParseError("not a number: '" + text + "'");
        }
    }
    return v;
}

void CsvTable::add_row(std::vector<std::string> row)
{
    rows.push_back(std::move(row));
}

void CsvTable::add_numeric_row(const std::vector<double>& values)
{
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) {
        row.push_back(format_double(v));
    }
    rows.push_back(std::move(row));
}

std::string to_csv_string(const CsvTable& table)
{
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                out << ',';
            }
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) {
        emit(row);
    }
    return out.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << to_csv_string(table);
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty CSV '" + path.string() + "'");
    }
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw ParseError("ragged row in '" + path.string() + "'");
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

void write_transient_csv(const std::filesystem::path& path, const Transient& transient)
{
    CsvTable table;
    table.header.emplace_back(var::time);
    for (const auto& n : transient.names) {
        table.header.push_back(n);
    }
    table.rows.reserve(transient.size());
    std::vector<double> row(transient.columns.size() + 1);
    for (std::size_t r = 0; r < transient.size(); ++r) {
        row[0] = transient.time[r];
        for (std::size_t c = 0; c < transient.columns.size(); ++c) {
            row[c + 1] = transient.columns[c][r];
        }
        table.add_numeric_row(row);
    }
    write_csv(path, table);
}

Transient read_transient_csv(const std::filesystem::path& path)
{
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header.front() != var::time) {
        throw ParseError("transient CSV '" + path.string() + "' must start with column time_s");
    }
    Transient t;
    t.scenario_id = path.stem().string();
    t.names.assign(table.header.begin() + 1, table.header.end());
    t.columns.assign(t.names.size(), {});
    t.time.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        t.time.push_back(parse_double(row[0]));
        for (std::size_t c = 1; c < row.size(); ++c) {
            t.columns[c - 1].push_back(parse_double(row[c]));
        }
    }
    return t;
}

} // namespace twinctl
