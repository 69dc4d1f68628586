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
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace twinctl::nn {

/// Every trainable coefficient of a network in one flat vector, with named
/// matrix views into it. Optimizers and gradient checks work on the flat vector.
class ParamSet {
public:
    struct Block {
        std::string name;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        Eigen::Index offset = 0;
        bool weight = true; // false for biases, which L2 leaves alone
    };

    /// Register a block; call before `finalize()`.
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols, bool weight);
    void finalize();

    [[nodiscard]] Eigen::Map<Eigen::MatrixXd> mat(std::size_t block);
    [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> mat(std::size_t block) const;

    /// Uniform(−1/√fan_in, 1/√fan_in) for weights (fan_in = columns), zero biases.
    void init_uniform(std::uint64_t seed);

    [[nodiscard]] Eigen::Index size() const { return values.size(); }
    [[nodiscard]] const std::vector<Block>& blocks() const { return blocks_; }
    /// 1 on weight entries, 0 on biases.
    [[nodiscard]] const Eigen::VectorXd& weight_mask() const { return weight_mask_; }
    [[nodiscard]] double weight_sq_norm() const;

    Eigen::VectorXd values;

private:
    std::vector<Block> blocks_;
    Eigen::VectorXd weight_mask_;
};

[[nodiscard]] nlohmann::json params_to_json(const ParamSet& p);
/// Values only; the block layout must already match.
void params_from_json(const nlohmann::json& j, ParamSet& p);

} // namespace twinctl::nn
