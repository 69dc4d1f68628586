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

#include <optional>
#include <string>
#include <vector>

#include "twinctl/common/csv.hpp"
#include "twinctl/common/transient.hpp"

namespace twinctl::analytics {

struct CoverageTarget {
    std::string name;
    const std::vector<Transient>* transients = nullptr;
    std::optional<double> model_error; // paired error of a model evaluated on this target
};

struct CoverageRow {
    std::string name;
    std::vector<double> sym_kl;       // per feature
    std::vector<double> hellinger_sq; // per feature
    double sym_kl_mean = 0.0;
    double hellinger_sq_mean = 0.0;
    std::optional<double> model_error;
};

struct CoverageReport {
    std::vector<std::string> features;
    std::vector<CoverageRow> rows;
    // Pearson of aggregate divergence vs model error, when ≥ 2 targets carry errors.
    std::optional<double> pcc_sym_kl;
    std::optional<double> pcc_hellinger_sq;

    [[nodiscard]] CsvTable to_csv() const;
};

/// Per-feature KDE over every time sample of every transient, divergence of
/// each target against the reference, mean over features as the aggregate.
[[nodiscard]] CoverageReport coverage_report(const std::vector<Transient>& reference,
                                             const std::vector<CoverageTarget>& targets,
                                             const std::vector<std::string>& features,
                                             std::size_t grid_points = 1025);

} // namespace twinctl::analytics
