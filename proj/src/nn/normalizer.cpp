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

#include "twinctl/nn/normalizer.hpp"

#include <cmath>

#include "twinctl/common/error.hpp"

namespace twinctl::nn {

Normalizer::Normalizer(Eigen::VectorXd mean, Eigen::VectorXd stddev) : mean_(std::move(mean)), std_(std::move(stddev))
{
    if (mean_.size() != std_.size()) {
        throw DimensionMismatch("normalizer mean and stddev differ in size");
    }
    for (Eigen::Index i = 0; i < std_.size(); ++i) {
        if (!(std_(i) > 0.0) || !std::isfinite(std_(i)) || !std::isfinite(mean_(i))) {
            throw ConstantFeature("normalizer feature " + std::to_string(i) + " has no spread");
        }
    }
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& samples, const std::vector<std::string>& names)
{
    if (samples.cols() < 2) {
        throw TooFew("normalizer needs at least two samples");
    }
    const Eigen::VectorXd mean = samples.rowwise().mean();
    const Eigen::VectorXd var =
        (samples.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(samples.cols());
    Eigen::VectorXd sd = var.array().sqrt();
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
        // relative floor: spread below rounding noise counts as constant
        if (!(sd(i) > 1e-12 * std::max(1.0, std::abs(mean(i))))) {
            const std::string label = static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)]
                                                                                : "#" + std::to_string(i);
            throw ConstantFeature("feature '" + label + "' is constant over the training split");
        }
    }
    return Normalizer(mean, sd);
}

Eigen::MatrixXd Normalizer::normalize(const Eigen::MatrixXd& x) const
{
    if (x.rows() != mean_.size()) {
        throw DimensionMismatch("normalizer expects " + std::to_string(mean_.size()) + " features");
    }
    return (x.colwise() - mean_).array().colwise() / std_.array();
}

Eigen::MatrixXd Normalizer::inverse(const Eigen::MatrixXd& z) const
{
    if (z.rows() != mean_.size()) {
        throw DimensionMismatch("normalizer expects " + std::to_string(mean_.size()) + " features");
    }
    return (z.array().colwise() * std_.array()).matrix().colwise() + mean_;
}

nlohmann::json Normalizer::to_json() const
{
    return {{"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
            {"std", std::vector<double>(std_.data(), std_.data() + std_.size())}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j)
{
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto s = j.at("std").get<std::vector<double>>();
    return Normalizer(Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size())),
                      Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())));
}

} // namespace twinctl::nn
