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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/nn/fnn.hpp"
#include "twinctl/nn/gru.hpp"

namespace twinctl::nn {

enum class Optimizer { SgdMomentum, Adam };

struct EpochRecord;

struct TrainConfig {
    int sequence_length = 5;         // BPTT window (recurrent nets)
    int batch_size = 100;
    double learning_rate = 0.001;
    int epochs_max = 200;
    double target_training_error = 0.0; // stop once training MSE falls below
    int validation_patience = 10;       // epochs without validation gain before lr decay
    double l2 = 0.0;
    double lr_decay_factor = 0.5;
    int early_stop_patience = 20;       // epochs without test gain before stopping
    Optimizer optimizer = Optimizer::SgdMomentum;
    double momentum = 0.9;
    double grad_clip = 0.0;             // global-norm clip, 0 = off
    int hidden = 30;
    int layers = 2;
    std::uint64_t seed = 1;
    /// Called after every epoch; not serialized, does not affect results.
    std::function<void(const EpochRecord&)> on_epoch;

    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const TrainConfig& c);
/// Unknown keys are rejected; missing keys keep their defaults.
[[nodiscard]] TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Overwrite named numeric fields (sequence_length, hidden, layers, batch_size,
/// learning_rate, l2, validation_patience, early_stop_patience, epochs_max,
/// momentum). Integer fields are rounded. Unknown names throw InvalidSpec.
void apply_hyperparameters(TrainConfig& c, const std::map<std::string, double>& values);

struct EpochRecord {
    int epoch = 0;
    double train_mse = 0.0;
    double validation_mse = 0.0;
    double test_mse = 0.0;
    double learning_rate = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    int best_epoch = 0;      // epoch whose parameters were kept
    std::string stop_reason; // "epochs_max", "target_training_error" or "early_stop"
    double train_mse = 0.0;
    double validation_mse = 0.0;
    double test_mse = 0.0;
};

/// Mini-batch training. Parameters are left at the epoch with the lowest
/// test MSE. Deterministic for a given config and seed, independent of the
/// OpenMP thread count. Throws Divergence on a non-finite loss.
TrainResult train(FeedforwardNet& net, const DenseDataset& train, const DenseDataset& validation,
                  const DenseDataset& test, const TrainConfig& config);

/// Sequences are cut into windows of `sequence_length` steps; the hidden
/// state is carried across windows of the same sequence (truncated BPTT).
TrainResult train(RecurrentNet& net, const SequenceDataset& train, const SequenceDataset& validation,
                  const SequenceDataset& test, const TrainConfig& config);

/// Pure masked MSE of a net on a dataset (no L2 term).
[[nodiscard]] double evaluate_mse(const FeedforwardNet& net, const DenseDataset& data);
[[nodiscard]] double evaluate_mse(const RecurrentNet& net, const SequenceDataset& data);

/// Loss (MSE + l2 term) and gradient of a whole dataset as one batch.
double full_loss(const RecurrentNet& net, const SequenceDataset& data, double l2, Eigen::VectorXd* grad);

struct GradCheckResult {
    double max_rel_error = 0.0;
    double max_abs_analytic = 0.0;
    double max_abs_numeric = 0.0;
};

/// Central differences on every parameter. Relative error per entry is
/// |a − n| / max(|a|, |n|, 1e-6); the floor keeps entries whose gradient is
/// at rounding level from dominating. eps in [1e-7, 1e-3].
[[nodiscard]] GradCheckResult grad_check(const FeedforwardNet& net, const DenseDataset& batch, double eps,
                                         double l2 = 0.0);
[[nodiscard]] GradCheckResult grad_check(const RecurrentNet& net, const SequenceDataset& batch, double eps,
                                         double l2 = 0.0);

} // namespace twinctl::nn
