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

#include "twinctl/nn/params.hpp"

#include <cmath>
#include <random>

#include "twinctl/common/error.hpp"

namespace twinctl::nn {

std::size_t ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols, bool weight)
{
    const Eigen::Index offset = blocks_.empty() ? 0 : blocks_.back().offset + blocks_.back().rows * blocks_.back().cols;
    blocks_.push_back({std::move(name), rows, cols, offset, weight});
    return blocks_.size() - 1;
}

void ParamSet::finalize()
{
    const Eigen::Index n = blocks_.empty() ? 0 : blocks_.back().offset + blocks_.back().rows * blocks_.back().cols;
    values = Eigen::VectorXd::Zero(n);
    weight_mask_ = Eigen::VectorXd::Zero(n);
    for (const auto& b : blocks_) {
        if (b.weight) {
            weight_mask_.segment(b.offset, b.rows * b.cols).setOnes();
        }
    }
}

Eigen::Map<Eigen::MatrixXd> ParamSet::mat(std::size_t block)
{
    const auto& b = blocks_[block];
    return {values.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::MatrixXd> ParamSet::mat(std::size_t block) const
{
    const auto& b = blocks_[block];
    return {values.data() + b.offset, b.rows, b.cols};
}

void ParamSet::init_uniform(std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    values.setZero();
    for (const auto& b : blocks_) {
        if (!b.weight) {
            continue;
        }
        const double limit = 1.0 / std::sqrt(static_cast<double>(b.cols));
        for (Eigen::Index i = 0; i < b.rows * b.cols; ++i) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            values(b.offset + i) = limit * (2.0 * u - 1.0);
        }
    }
}

double ParamSet::weight_sq_norm() const
{
    return values.cwiseProduct(weight_mask_).squaredNorm();
}

nlohmann::json params_to_json(const ParamSet& p)
{
    nlohmann::json blocks = nlohmann::json::array();
    for (std::size_t i = 0; i < p.blocks().size(); ++i) {
        const auto& b = p.blocks()[i];
        const auto m = p.mat(i);
        std::vector<double> data(m.data(), m.data() + m.size());
        blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"data", data}});
    }
    return blocks;
}

void params_from_json(const nlohmann::json& j, ParamSet& p)
{
    if (!j.is_array() || j.size() != p.blocks().size()) {
        throw ModelLoadError("parameter block count does not match the network layout");
    }
    for (std::size_t i = 0; i < p.blocks().size(); ++i) {
        const auto& b = p.blocks()[i];
        const auto& e = j[i];
        if (e.at("name").get<std::string>() != b.name || e.at("rows").get<Eigen::Index>() != b.rows ||
            e.at("cols").get<Eigen::Index>() != b.cols) {
            throw ModelLoadError("parameter block '" + b.name + "' does not match the stored layout");
        }
        const auto data = e.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != b.rows * b.cols) {
            throw ModelLoadError("parameter block '" + b.name + "' has the wrong number of values");
        }
        auto m = p.mat(i);
        for (Eigen::Index k = 0; k < m.size(); ++k) {
            if (!std::isfinite(data[static_cast<std::size_t>(k)])) {
                throw ModelLoadError("non-finite parameter in '" + b.name + "'");
            }
            m.data()[k] = data[static_cast<std::size_t>(k)];
        }
    }
}

} // namespace twinctl::nn
