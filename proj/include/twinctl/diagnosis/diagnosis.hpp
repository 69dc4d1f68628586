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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "twinctl/common/error_report.hpp"
#include "twinctl/common/transient.hpp"
#include "twinctl/nn/fnn.hpp"
#include "twinctl/nn/gru.hpp"
#include "twinctl/nn/normalizer.hpp"
#include "twinctl/nn/train.hpp"
#include "twinctl/plant/state.hpp"
#include "twinctl/scenario/database.hpp"

namespace twinctl::dtd {

enum class Variant { Fnn, Rnn };

[[nodiscard]] std::string to_string(Variant v);
/// "fnn" or "rnn"; anything else throws InvalidSpec.
[[nodiscard]] Variant variant_from_string(const std::string& s);

struct DiagnosisConfig {
    Variant variant = Variant::Rnn;
    std::vector<std::string> inputs;  // defaults to the three plena temperatures
    std::vector<std::string> outputs; // defaults to PFCL and peak clad
    /// For the rnn variant `sequence_length` is the sensor window, and
    /// every window is scored at its last step only.
    nn::TrainConfig train;
    int window_stride = 1; // training windows end every k-th sample
    std::array<double, 3> split{0.8, 0.1, 0.1};
    std::uint64_t split_seed = 7;

    DiagnosisConfig();
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const DiagnosisConfig& c);
[[nodiscard]] DiagnosisConfig diagnosis_config_from_json(const nlohmann::json& j, DiagnosisConfig base = {});

struct EvaluationRecord {
    ErrorReport train;
    ErrorReport validation;
    ErrorReport test;
    int best_epoch = 0;
    int epochs_run = 0;
    std::string stop_reason;
};

class DiagnosisModel {
public:
    DiagnosisConfig config;
    std::string database_fingerprint;
    nn::Normalizer input_norm;
    nn::Normalizer output_norm;
    std::optional<nn::FeedforwardNet> fnn;
    std::optional<nn::RecurrentNet> rnn;
    EvaluationRecord evaluation;

    /// Samples per estimate: the rnn window, 1 for fnn.
    [[nodiscard]] int window() const;

    /// x is (inputs × T) in physical units, one column per time point.
    /// Returns (outputs × T). Points earlier than a full window see the
    /// first sample repeated.
    [[nodiscard]] Eigen::MatrixXd estimate(const Eigen::MatrixXd& x) const;

    /// Estimates for every row of a transient carrying the input columns.
    /// The result holds time plus one column per output.
    [[nodiscard]] Transient infer(const Transient& sensors) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static DiagnosisModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static DiagnosisModel load(const std::filesystem::path& path);
};

/// Train on pre-split transients.
[[nodiscard]] DiagnosisModel train_dtd(const scenario::Split& split, const DiagnosisConfig& config,
                                       const std::string& database_fingerprint);
/// Split the database with config.split / split_seed, then train.
[[nodiscard]] DiagnosisModel train_dtd(const scenario::Database& db, const DiagnosisConfig& config);

/// Estimates at each frame time. Throws WindowTooShort when the rnn variant
/// gets fewer frames than its window, MissingFeature for an absent sensor.
[[nodiscard]] Transient infer_ssf(const DiagnosisModel& model, std::span<const plant::SensorFrame> window);

/// Multiplicative measurement noise: x + N(0, (c_i·|x|)²) on input i.
/// Empty `c` means no noise.
struct NoiseSpec {
    std::vector<double> c;
    std::uint64_t seed = 0;
};

[[nodiscard]] ErrorReport evaluate_dtd(const DiagnosisModel& model, const std::vector<Transient>& transients,
                                       const NoiseSpec& noise = {});

struct NoiseRow {
    std::string label; // "clean" or the noisy input's name
    ErrorReport report;
};

/// One clean row, then one row per input with noise `c` on that input only.
[[nodiscard]] std::vector<NoiseRow> noise_study(const DiagnosisModel& model, const std::vector<Transient>& transients,
                                                double c, std::uint64_t seed);

} // namespace twinctl::dtd
