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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/common/csv.hpp"

namespace twinctl::analytics {

struct ParamRange {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool integer = false; // sampled values are rounded to the nearest integer
};

using ParamPoint = std::map<std::string, double>;
using Objective = std::function<double(const ParamPoint&)>;

[[nodiscard]] std::vector<ParamRange> ranges_from_json(const nlohmann::json& j);

struct SensitivityEntry {
    std::string name;
    std::vector<double> values;
    std::vector<double> errors; // NaN for a failed sample
    double pcc = 0.0;
    bool strong = false;        // |pcc| > 0.5
    std::size_t failures = 0;
};

struct SensitivityReport {
    std::vector<SensitivityEntry> entries;
    [[nodiscard]] CsvTable to_csv() const;
};

/// One parameter at a time: n uniform draws of it, the others at `defaults`.
/// Throws ObjectiveFailures when fewer than 80% of a parameter's samples
/// succeed. `jobs` > 1 evaluates samples concurrently (the objective must
/// then be thread-safe); results are merged by sample index.
[[nodiscard]] SensitivityReport sensitivity_scan(const std::vector<ParamRange>& space, const ParamPoint& defaults,
                                                 const Objective& objective, int n, std::uint64_t seed,
                                                 int jobs = 1);

struct Trial {
    std::size_t index = 0;
    ParamPoint params;
    double objective = 0.0; // NaN when failed
    bool failed = false;
    std::string error;
};

struct HyperoptResult {
    std::vector<Trial> trials;
    std::size_t best_index = 0;
    ParamPoint best_params;
    double best_objective = 0.0;
    std::optional<double> default_objective; // the comparison row, when defaults were given

    [[nodiscard]] CsvTable to_csv() const;
};

struct SmboConfig {
    int n_trials = 100;
    int n_startup = 20;   // random trials before the Parzen model kicks in
    double gamma = 0.25;  // good/bad split quantile
    int n_candidates = 24;
};

/// Simplified tree-structured Parzen estimator. Sequential and deterministic
/// per seed. Throws ObjectiveFailures if every trial fails.
[[nodiscard]] HyperoptResult smbo_optimize(const Objective& objective, const std::vector<ParamRange>& space,
                                           const SmboConfig& config, std::uint64_t seed,
                                           const std::optional<ParamPoint>& defaults = std::nullopt);

} // namespace twinctl::analytics
