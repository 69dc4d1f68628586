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

#include "twinctl/common/transient.hpp"

#include <cmath>

#include "twinctl/common/error.hpp"

namespace twinctl {

bool Transient::has(std::string_view name) const
{
    for (const auto& n : names) {
        if (n == name) {
            return true;
        }
    }
    return false;
}

std::size_t Transient::index_of(std::string_view name) const
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    throw MissingFeature("transient '" + scenario_id + "' has no column '" + std::string(name) + "'");
}

const std::vector<double>& Transient::column(std::string_view name) const
{
    return columns[index_of(name)];
}

std::vector<double>& Transient::column(std::string_view name)
{
    return columns[index_of(name)];
}

void Transient::add_column(std::string name, std::vector<double> values)
{
    if (values.size() != time.size()) {
        throw InvalidSpec("column '" + name + "' length does not match time grid");
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

double Transient::cadence() const
{
    if (time.size() < 2) {
        throw WindowMismatch("transient shorter than two samples has no cadence");
    }
    const double dt = time[1] - time[0];
    for (std::size_t i = 2; i < time.size(); ++i) {
        if (std::abs((time[i] - time[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
            throw WindowMismatch("transient '" + scenario_id + "' has a non-uniform time grid");
        }
    }
    return dt;
}

Transient Transient::slice(double t0, double t1) const
{
    Transient out;
    out.scenario_id = scenario_id;
    out.issue_point = issue_point;
    out.seed = seed;
    out.names = names;
    out.columns.resize(columns.size());
    for (std::size_t r = 0; r < time.size(); ++r) {
        if (time[r] >= t0 - 1e-9 && time[r] <= t1 + 1e-9) {
            out.time.push_back(time[r]);
            for (std::size_t c = 0; c < columns.size(); ++c) {
                out.columns[c].push_back(columns[c][r]);
            }
        }
    }
    return out;
}

double Transient::issue(std::string_view key) const
{
    for (const auto& [k, v] : issue_point) {
        if (k == key) {
            return v;
        }
    }
    throw MissingFeature("transient '" + scenario_id + "' has no issue parameter '" + std::string(key) + "'");
}

} // namespace twinctl
