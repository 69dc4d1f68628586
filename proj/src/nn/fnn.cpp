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

#include "twinctl/nn/fnn.hpp"

#include "twinctl/common/error.hpp"

namespace twinctl::nn {

FeedforwardNet::FeedforwardNet(std::vector<int> widths, std::uint64_t seed) : widths_(std::move(widths))
{
    if (widths_.size() < 3) {
        throw InvalidSpec("feedforward net needs input, at least one hidden and an output width");
    }
    for (int w : widths_) {
        if (w < 1) {
            throw InvalidSpec("layer widths must be positive");
        }
    }
    layout();
    params.init_uniform(seed);
}

void FeedforwardNet::layout()
{
    params = ParamSet();
    weight_block_.clear();
    bias_block_.clear();
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const std::string tag = "layer" + std::to_string(l);
        weight_block_.push_back(params.add(tag + ".weights", widths_[l + 1], widths_[l], true));
        bias_block_.push_back(params.add(tag + ".bias", widths_[l + 1], 1, false));
    }
    params.finalize();
}

Eigen::VectorXd FeedforwardNet::forward(const Eigen::VectorXd& x) const
{
    return forward_batch(x);
}

Eigen::MatrixXd FeedforwardNet::forward_batch(const Eigen::MatrixXd& x) const
{
    if (x.rows() != inputs()) {
        throw DimensionMismatch("input has " + std::to_string(x.rows()) + " features, net expects " +
                                std::to_string(inputs()));
    }
    Eigen::MatrixXd a = x;
    const std::size_t layers = weight_block_.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = params.mat(weight_block_[l]) * a;
        z.colwise() += params.mat(bias_block_[l]).col(0);
        a = l + 1 < layers ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    return a;
}

double FeedforwardNet::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double l2,
                            Eigen::VectorXd* grad) const
{
    if (x.rows() != inputs() || y.rows() != outputs() || x.cols() != y.cols() || x.cols() == 0) {
        throw DimensionMismatch("batch shape does not match the network");
    }
    const std::size_t layers = weight_block_.size();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(layers + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = params.mat(weight_block_[l]) * acts.back();
        z.colwise() += params.mat(bias_block_[l]).col(0);
        acts.push_back(l + 1 < layers ? Eigen::MatrixXd(z.array().tanh()) : z);
    }
    const Eigen::MatrixXd diff = acts.back() - y;
    const double count = static_cast<double>(diff.size());
    const double mse = diff.squaredNorm() / count;
    const double total = mse + l2 * params.weight_sq_norm();
    if (grad == nullptr) {
        return total;
    }
    grad->setZero(params.size());
    Eigen::MatrixXd delta = (2.0 / count) * diff;
    for (std::size_t l = layers; l-- > 0;) {
        const auto& wb = params.blocks()[weight_block_[l]];
        const auto& bb = params.blocks()[bias_block_[l]];
        Eigen::Map<Eigen::MatrixXd>(grad->data() + wb.offset, wb.rows, wb.cols) = delta * acts[l].transpose();
        grad->segment(bb.offset, bb.rows) = delta.rowwise().sum();
        if (l > 0) {
            delta = (params.mat(weight_block_[l]).transpose() * delta).array() *
                    (1.0 - acts[l].array().square());
        }
    }
    *grad += 2.0 * l2 * params.values.cwiseProduct(params.weight_mask());
    return total;
}

nlohmann::json FeedforwardNet::to_json() const
{
    return {{"kind", "fnn"}, {"widths", widths_}, {"params", params_to_json(params)}};
}

FeedforwardNet FeedforwardNet::from_json(const nlohmann::json& j)
{
    if (j.value("kind", "") != "fnn") {
        throw ModelLoadError("not a feedforward net");
    }
    FeedforwardNet net;
    net.widths_ = j.at("widths").get<std::vector<int>>();
    if (net.widths_.size() < 3) {
        throw ModelLoadError("feedforward net needs at least three widths");
    }
    net.layout();
    params_from_json(j.at("params"), net.params);
    return net;
}

} // namespace twinctl::nn
