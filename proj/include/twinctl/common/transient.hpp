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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace twinctl {

/// Named scalar parameters describing where a transient sits in its issue space.
using IssueParams = std::vector<std::pair<std::string, double>>;

/// Time-indexed table of plant variables for one scenario, stored column-wise.
struct Transient {
    std::string scenario_id;
    IssueParams issue_point;
    std::uint64_t seed = 0;
    std::vector<double> time;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t size() const { return time.size(); }
    [[nodiscard]] bool has(std::string_view name) const;
    /// Throws MissingFeature when absent.
    [[nodiscard]] const std::vector<double>& column(std::string_view name) const;
    [[nodiscard]] std::vector<double>& column(std::string_view name);
    [[nodiscard]] std::size_t index_of(std::string_view name) const;
    void add_column(std::string name, std::vector<double> values);
    /// Uniform sample spacing; throws if the grid is not uniform.
    [[nodiscard]] double cadence() const;
    /// Rows whose time lies in [t0, t1] (inclusive, with 1e-9 slack).
    [[nodiscard]] Transient slice(double t0, double t1) const;
    [[nodiscard]] double issue(std::string_view key) const;
};

} // namespace twinctl
