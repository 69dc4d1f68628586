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

#include "twinctl/common/features.hpp"

#include <set>

#include "twinctl/common/error.hpp"

namespace twinctl {

Eigen::MatrixXd feature_matrix(const Transient& tr, const std::vector<std::string>& names)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(tr.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& col = tr.column(names[i]);
        if (col.size() != tr.size()) {
            throw DimensionMismatch("column '" + names[i] + "' length differs from the time axis");
        }
        m.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
    }
    return m;
}

Eigen::MatrixXd pooled_features(const std::vector<Transient>& set, const std::vector<std::string>& names)
{
    Eigen::Index total = 0;
    for (const auto& tr : set) {
        total += static_cast<Eigen::Index>(tr.size());
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(names.size()), total);
    Eigen::Index at = 0;
    for (const auto& tr : set) {
        const Eigen::MatrixXd f = feature_matrix(tr, names);
        m.middleCols(at, f.cols()) = f;
        at += f.cols();
    }
    return m;
}

void check_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    if (a.empty() || b.empty()) {
        throw InvalidSpec("feature lists must be non-empty");
    }
    std::set<std::string> seen;
    for (const auto& n : a) {
        if (!seen.insert(n).second) {
            throw InvalidSpec("feature '" + n + "' listed twice");
        }
    }
    for (const auto& n : b) {
        if (seen.contains(n)) {
            throw InvalidSpec("feature '" + n + "' appears as both input and output");
        }
    }
}

} // namespace twinctl
