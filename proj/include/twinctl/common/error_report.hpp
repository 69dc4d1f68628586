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

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace twinctl {

/// Errors in physical units, one entry per variable.
struct ErrorReport {
    std::vector<std::string> names;
    std::vector<double> mse;
    std::vector<double> rmse;
    std::size_t points = 0;

    /// Throws MissingFeature when `name` is not reported.
    [[nodiscard]] double rmse_of(const std::string& name) const;
    [[nodiscard]] double mse_of(const std::string& name) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static ErrorReport from_json(const nlohmann::json& j);
};

} // namespace twinctl
