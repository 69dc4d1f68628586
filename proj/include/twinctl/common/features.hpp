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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twinctl/common/transient.hpp"

namespace twinctl {

/// Rows are the named columns of `tr`, columns are time samples.
/// Throws MissingFeature naming the first absent column.
[[nodiscard]] Eigen::MatrixXd feature_matrix(const Transient& tr, const std::vector<std::string>& names);

/// Pool feature_matrix over several transients, side by side.
[[nodiscard]] Eigen::MatrixXd pooled_features(const std::vector<Transient>& set,
                                              const std::vector<std::string>& names);

/// Throws InvalidSpec when the lists are empty or share a name.
void check_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace twinctl
