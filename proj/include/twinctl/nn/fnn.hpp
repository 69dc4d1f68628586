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
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "twinctl/nn/params.hpp"

namespace twinctl::nn {

/// Samples stored column-wise: x is (inputs × N), y is (outputs × N).
struct DenseDataset {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;

    [[nodiscard]] Eigen::Index size() const { return x.cols(); }
};

/// Fully connected net, tanh hidden layers and a linear output layer.
class FeedforwardNet {
public:
    FeedforwardNet() = default;
    /// widths = {inputs, hidden..., outputs}; at least one hidden layer.
    FeedforwardNet(std::vector<int> widths, std::uint64_t seed);

    [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    /// MSE over all outputs and columns plus l2·Σw². Fills `grad` when non-null.
    double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double l2, Eigen::VectorXd* grad) const;

    [[nodiscard]] const std::vector<int>& widths() const { return widths_; }
    [[nodiscard]] int inputs() const { return widths_.front(); }
    [[nodiscard]] int outputs() const { return widths_.back(); }

    ParamSet params;

    [[nodiscard]] nlohmann::json to_json() const;
    static FeedforwardNet from_json(const nlohmann::json& j);

private:
    void layout();

    std::vector<int> widths_;
    std::vector<std::size_t> weight_block_;
    std::vector<std::size_t> bias_block_;
};

} // namespace twinctl::nn
