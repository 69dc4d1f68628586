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
#include <nlohmann/json.hpp>

namespace twinctl::nn {

/// Per-feature z-score. Statistics come from the training split only.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(Eigen::VectorXd mean, Eigen::VectorXd stddev);

    /// Columns are samples. Throws ConstantFeature when a row has zero spread;
    /// `names` (optional) labels the offending feature in the message.
    static Normalizer fit(const Eigen::MatrixXd& samples, const std::vector<std::string>& names = {});

    [[nodiscard]] Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;
    [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd& z) const;

    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] const Eigen::VectorXd& stddev() const { return std_; }
    [[nodiscard]] Eigen::Index size() const { return mean_.size(); }

    [[nodiscard]] nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json& j);

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd std_;
};

} // namespace twinctl::nn
