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

/// Variable-length sequences. inputs[k] is (inputs × T_k), targets[k] is
/// (outputs × T_k) and masks[k] weights each step's loss (0 = not scored).
struct SequenceDataset {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> targets;
    std::vector<Eigen::VectorXd> masks;

    [[nodiscard]] std::size_t size() const { return inputs.size(); }
    void validate(Eigen::Index n_in, Eigen::Index n_out) const;
};

/// Hidden state of every layer, one column per sequence in the batch.
struct GruState {
    std::vector<Eigen::MatrixXd> h;
};

/// Per-step loss data for a batch: one (rows × batch) matrix per time step.
struct BatchSteps {
    std::vector<Eigen::MatrixXd> x;    // inputs × B
    std::vector<Eigen::MatrixXd> y;    // outputs × B
    std::vector<Eigen::RowVectorXd> m; // 1 × B
};

struct LossValue {
    double total = 0.0; // mse + l2 term
    double sse = 0.0;   // Σ mask · squared residual
    double count = 0.0; // Σ mask · outputs
};

/// Stacked GRU with a linear readout from the top layer.
///
///   z = σ(U_z x + W_z h + b_z)
///   r = σ(U_r x + W_r h + b_r)
///   n = tanh(U_n x + W_n (r ⊙ h) + b_n)
///   h' = (1 − z) ⊙ h + z ⊙ n,     y = V h' + c
///
/// Per layer, block "input_weights" stacks U_{z,r,n}, "recurrent_weights"
/// stacks W_{z,r,n}; "readout.weights" is V.
class RecurrentNet {
public:
    RecurrentNet() = default;
    RecurrentNet(int inputs, int hidden, int layers, int outputs, std::uint64_t seed);

    [[nodiscard]] GruState zero_state(Eigen::Index batch = 1) const;

    /// One sequence (inputs × T). Returns outputs (outputs × T); `state` becomes the final state.
    [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& sequence, GruState& state) const;
    /// Single step for a batch (inputs × B); returns (outputs × B).
    [[nodiscard]] Eigen::MatrixXd step(const Eigen::MatrixXd& x, GruState& state) const;

    /// Masked MSE over the steps plus l2·Σw², starting from `state` (updated to
    /// the final state). Gradient flows through the steps only, not into the
    /// incoming state. Fills `grad` when non-null.
    LossValue loss(const BatchSteps& steps, GruState& state, double l2, Eigen::VectorXd* grad) const;

    [[nodiscard]] int inputs() const { return inputs_; }
    [[nodiscard]] int hidden() const { return hidden_; }
    [[nodiscard]] int layers() const { return layers_; }
    [[nodiscard]] int outputs() const { return outputs_; }

    ParamSet params;

    [[nodiscard]] nlohmann::json to_json() const;
    static RecurrentNet from_json(const nlohmann::json& j);

private:
    void layout();
    void check_state(const GruState& state, Eigen::Index batch) const;

    int inputs_ = 0;
    int hidden_ = 0;
    int layers_ = 0;
    int outputs_ = 0;
    std::vector<std::size_t> in_block_;
    std::vector<std::size_t> rec_block_;
    std::vector<std::size_t> bias_block_;
    std::size_t readout_block_ = 0;
    std::size_t readout_bias_ = 0;
};

} // namespace twinctl::nn
