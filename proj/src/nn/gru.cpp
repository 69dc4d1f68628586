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

#include "twinctl/nn/gru.hpp"

#include <cmath>

#include "twinctl/common/error.hpp"

namespace twinctl::nn {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a)
{
    return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

struct StepCache {
    Eigen::MatrixXd x;      // layer input
    Eigen::MatrixXd h_prev;
    Eigen::MatrixXd z;
    Eigen::MatrixXd r;
    Eigen::MatrixXd n;
    Eigen::MatrixXd rh;     // r ⊙ h_prev
    Eigen::MatrixXd h;      // layer output
};

} // namespace

void SequenceDataset::validate(Eigen::Index n_in, Eigen::Index n_out) const
{
    if (inputs.size() != targets.size() || inputs.size() != masks.size()) {
        throw DimensionMismatch("sequence dataset parts differ in length");
    }
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (inputs[k].rows() != n_in || targets[k].rows() != n_out || inputs[k].cols() != targets[k].cols() ||
            masks[k].size() != inputs[k].cols() || inputs[k].cols() == 0) {
            throw DimensionMismatch("sequence " + std::to_string(k) + " does not match the network shape");
        }
    }
}

RecurrentNet::RecurrentNet(int inputs, int hidden, int layers, int outputs, std::uint64_t seed)
    : inputs_(inputs), hidden_(hidden), layers_(layers), outputs_(outputs)
{
    if (inputs < 1 || hidden < 1 || layers < 1 || outputs < 1) {
        throw InvalidSpec("recurrent net dimensions must be positive");
    }
    layout();
    params.init_uniform(seed);
}

void RecurrentNet::layout()
{
    params = ParamSet();
    in_block_.clear();
    rec_block_.clear();
    bias_block_.clear();
    for (int l = 0; l < layers_; ++l) {
        const std::string tag = "layer" + std::to_string(l);
        const int d = l == 0 ? inputs_ : hidden_;
        in_block_.push_back(params.add(tag + ".input_weights", 3 * hidden_, d, true));
        rec_block_.push_back(params.add(tag + ".recurrent_weights", 3 * hidden_, hidden_, true));
        bias_block_.push_back(params.add(tag + ".bias", 3 * hidden_, 1, false));
    }
    readout_block_ = params.add("readout.weights", outputs_, hidden_, true);
    readout_bias_ = params.add("readout.bias", outputs_, 1, false);
    params.finalize();
}

GruState RecurrentNet::zero_state(Eigen::Index batch) const
{
    GruState s;
    s.h.assign(static_cast<std::size_t>(layers_), Eigen::MatrixXd::Zero(hidden_, batch));
    return s;
}

void RecurrentNet::check_state(const GruState& state, Eigen::Index batch) const
{
    if (state.h.size() != static_cast<std::size_t>(layers_)) {
        throw DimensionMismatch("hidden state has the wrong number of layers");
    }
    for (const auto& h : state.h) {
        if (h.rows() != hidden_ || h.cols() != batch) {
            throw DimensionMismatch("hidden state width or batch does not match");
        }
    }
}

Eigen::MatrixXd RecurrentNet::step(const Eigen::MatrixXd& x, GruState& state) const
{
    if (x.rows() != inputs_) {
        throw DimensionMismatch("input has " + std::to_string(x.rows()) + " features, net expects " +
                                std::to_string(inputs_));
    }
    check_state(state, x.cols());
    const Eigen::Index H = hidden_;
    Eigen::MatrixXd a = x;
    for (int l = 0; l < layers_; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const auto U = params.mat(in_block_[lu]);
        const auto W = params.mat(rec_block_[lu]);
        const auto b = params.mat(bias_block_[lu]);
        Eigen::MatrixXd& h = state.h[lu];
        Eigen::MatrixXd g = U * a;
        g.colwise() += b.col(0);
        g.topRows(2 * H) += W.topRows(2 * H) * h;
        const Eigen::MatrixXd z = sigmoid(g.topRows(H));
        const Eigen::MatrixXd r = sigmoid(g.middleRows(H, H));
        const Eigen::MatrixXd rh = r.cwiseProduct(h);
        const Eigen::MatrixXd n = (g.bottomRows(H) + W.bottomRows(H) * rh).array().tanh().matrix();
        h += z.cwiseProduct(n - h);
        a = h;
    }
    Eigen::MatrixXd y = params.mat(readout_block_) * a;
    y.colwise() += params.mat(readout_bias_).col(0);
    return y;
}

Eigen::MatrixXd RecurrentNet::forward(const Eigen::MatrixXd& sequence, GruState& state) const
{
    if (sequence.cols() == 0) {
        throw DimensionMismatch("empty input sequence");
    }
    Eigen::MatrixXd out(outputs_, sequence.cols());
    for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
        out.col(t) = step(sequence.col(t), state);
    }
    return out;
}

LossValue RecurrentNet::loss(const BatchSteps& steps, GruState& state, double l2, Eigen::VectorXd* grad) const
{
    const std::size_t T = steps.x.size();
    if (T == 0 || steps.y.size() != T || steps.m.size() != T) {
        throw DimensionMismatch("batch steps are empty or inconsistent");
    }
    const Eigen::Index B = steps.x.front().cols();
    check_state(state, B);
    const Eigen::Index H = hidden_;
    const auto L = static_cast<std::size_t>(layers_);

    std::vector<std::vector<StepCache>> cache(T, std::vector<StepCache>(L));
    std::vector<Eigen::MatrixXd> resid(T);
    LossValue lv;
    const auto V = params.mat(readout_block_);
    const auto c = params.mat(readout_bias_);
    for (std::size_t t = 0; t < T; ++t) {
        if (steps.x[t].rows() != inputs_ || steps.x[t].cols() != B || steps.y[t].rows() != outputs_ ||
            steps.y[t].cols() != B || steps.m[t].size() != B) {
            throw DimensionMismatch("batch step shape does not match the network");
        }
        Eigen::MatrixXd a = steps.x[t];
        for (std::size_t l = 0; l < L; ++l) {
            StepCache& k = cache[t][l];
            const auto U = params.mat(in_block_[l]);
            const auto W = params.mat(rec_block_[l]);
            const auto b = params.mat(bias_block_[l]);
            Eigen::MatrixXd& h = state.h[l];
            k.x = a;
            k.h_prev = h;
            Eigen::MatrixXd g = U * a;
            g.colwise() += b.col(0);
            g.topRows(2 * H) += W.topRows(2 * H) * h;
            k.z = sigmoid(g.topRows(H));
            k.r = sigmoid(g.middleRows(H, H));
            k.rh = k.r.cwiseProduct(h);
            k.n = (g.bottomRows(H) + W.bottomRows(H) * k.rh).array().tanh().matrix();
            h += k.z.cwiseProduct(k.n - h);
            k.h = h;
            a = h;
        }
        Eigen::MatrixXd y = V * a;
        y.colwise() += c.col(0);
        resid[t] = (y - steps.y[t]).array().rowwise() * steps.m[t].array();
        lv.sse += ((y - steps.y[t]).array().square().rowwise() * steps.m[t].array()).sum();
        lv.count += steps.m[t].sum() * static_cast<double>(outputs_);
    }
    const double mse = lv.count > 0.0 ? lv.sse / lv.count : 0.0;
    lv.total = mse + l2 * params.weight_sq_norm();
    if (grad == nullptr) {
        return lv;
    }
    grad->setZero(params.size());
    auto block = [&](std::size_t id) {
        const auto& bl = params.blocks()[id];
        return Eigen::Map<Eigen::MatrixXd>(grad->data() + bl.offset, bl.rows, bl.cols);
    };
    if (lv.count > 0.0) {
        const double scale = 2.0 / lv.count;
        auto gV = block(readout_block_);
        auto gc = block(readout_bias_);
        std::vector<Eigen::MatrixXd> dh_next(L, Eigen::MatrixXd::Zero(H, B));
        for (std::size_t t = T; t-- > 0;) {
            const Eigen::MatrixXd dy = scale * resid[t];
            gV += dy * cache[t][L - 1].h.transpose();
            gc += dy.rowwise().sum();
            Eigen::MatrixXd dh_above = V.transpose() * dy; // gradient flowing into layer output from above
            for (std::size_t l = L; l-- > 0;) {
                const StepCache& k = cache[t][l];
                const auto U = params.mat(in_block_[l]);
                const auto W = params.mat(rec_block_[l]);
                Eigen::MatrixXd dh = dh_above + dh_next[l];
                const Eigen::MatrixXd dn = dh.cwiseProduct(k.z);
                const Eigen::MatrixXd dz = dh.cwiseProduct(k.n - k.h_prev);
                Eigen::MatrixXd dh_prev = dh.cwiseProduct((1.0 - k.z.array()).matrix());
                Eigen::MatrixXd da(3 * H, B);
                da.bottomRows(H) = dn.cwiseProduct((1.0 - k.n.array().square()).matrix());
                const Eigen::MatrixXd drh = W.bottomRows(H).transpose() * da.bottomRows(H);
                dh_prev += drh.cwiseProduct(k.r);
                const Eigen::MatrixXd dr = drh.cwiseProduct(k.h_prev);
                da.topRows(H) = dz.array() * k.z.array() * (1.0 - k.z.array());
                da.middleRows(H, H) = dr.array() * k.r.array() * (1.0 - k.r.array());
                auto gU = block(in_block_[l]);
                auto gW = block(rec_block_[l]);
                auto gb = block(bias_block_[l]);
                gU += da * k.x.transpose();
                gb += da.rowwise().sum();
                gW.topRows(2 * H) += da.topRows(2 * H) * k.h_prev.transpose();
                gW.bottomRows(H) += da.bottomRows(H) * k.rh.transpose();
                dh_prev += W.topRows(2 * H).transpose() * da.topRows(2 * H);
                dh_next[l] = dh_prev;
                if (l > 0) {
                    dh_above = U.transpose() * da;
                }
            }
        }
    }
    *grad += 2.0 * l2 * params.values.cwiseProduct(params.weight_mask());
    return lv;
}

nlohmann::json RecurrentNet::to_json() const
{
    return {{"kind", "gru"},   {"inputs", inputs_},   {"hidden", hidden_},
            {"layers", layers_}, {"outputs", outputs_}, {"params", params_to_json(params)}};
}

RecurrentNet RecurrentNet::from_json(const nlohmann::json& j)
{
    if (j.value("kind", "") != "gru") {
        throw ModelLoadError("not a recurrent net");
    }
    RecurrentNet net;
    net.inputs_ = j.at("inputs").get<int>();
    net.hidden_ = j.at("hidden").get<int>();
    net.layers_ = j.at("layers").get<int>();
    net.outputs_ = j.at("outputs").get<int>();
    if (net.inputs_ < 1 || net.hidden_ < 1 || net.layers_ < 1 || net.outputs_ < 1) {
        throw ModelLoadError("recurrent net dimensions must be positive");
    }
    net.layout();
    params_from_json(j.at("params"), net.params);
    return net;
}

} // namespace twinctl::nn
