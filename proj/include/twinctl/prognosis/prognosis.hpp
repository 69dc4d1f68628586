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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "twinctl/common/error_report.hpp"
#include "twinctl/common/transient.hpp"
#include "twinctl/nn/gru.hpp"
#include "twinctl/nn/normalizer.hpp"
#include "twinctl/nn/train.hpp"
#include "twinctl/scenario/database.hpp"
#include "twinctl/strategy/inventory.hpp"

namespace twinctl::dtp {

struct PrognosisConfig {
    std::vector<std::string> states;  // predicted and fed back
    std::vector<std::string> actions; // inputs only: both pump torques
    nn::TrainConfig train;
    int burn_in = 5;              // leading steps of each sequence left unscored
    bool residual = true;        // predict the per-step change instead of the next state
    double warmup_history = 20.0; // s, default history before t_r
    double eval_t_r = 38.0;       // s, closed-loop evaluation start
    std::array<double, 3> split{0.8, 0.1, 0.1};
    std::uint64_t split_seed = 7;

    PrognosisConfig();
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const PrognosisConfig& c);
[[nodiscard]] PrognosisConfig prognosis_config_from_json(const nlohmann::json& j, PrognosisConfig base = {});

/// Measured records from t_h to t_r at a uniform cadence.
struct HistoryBuffer {
    std::vector<double> time;
    Eigen::MatrixXd states;  // states × n
    Eigen::MatrixXd actions; // actions × n

    /// Throws InvalidSpec for an empty, non-increasing or non-uniform buffer.
    void validate() const;
    [[nodiscard]] double t_r() const { return time.back(); }
    [[nodiscard]] double cadence() const;

    /// Rows of `tr` with time in [t_r − length, t_r]. length 0 keeps the single record at t_r.
    static HistoryBuffer from_transient(const Transient& tr, const std::vector<std::string>& states,
                                        const std::vector<std::string>& actions, double t_r, double length);
};

/// Carried recursion state: the hidden state plus the pending prediction.
struct Rollout {
    nn::GruState state;
    Eigen::VectorXd next; // predicted states at `time_next`, physical units
    double t_r = 0.0;
    double cadence = 1.0;
    long step = 1;        // time_next = t_r + step · cadence

    [[nodiscard]] double time_next() const { return t_r + static_cast<double>(step) * cadence; }
};

struct EvaluationRecord {
    ErrorReport one_step_train;
    ErrorReport one_step_validation;
    ErrorReport one_step_test;
    ErrorReport closed_loop_test;
    int best_epoch = 0;
    int epochs_run = 0;
    std::string stop_reason;
};

/// One-step model: the net maps normalized (X_p(t), A(t)) to the normalized
/// X_p(t + Δ), or to the normalized change X_p(t + Δ) − X_p(t) when
/// config.residual is set.
class PrognosisModel {
public:
    PrognosisConfig config;
    std::string database_fingerprint;
    nn::Normalizer state_norm;
    nn::Normalizer action_norm;
    nn::Normalizer delta_norm; // fitted only in residual mode
    nn::RecurrentNet net;
    EvaluationRecord evaluation;

    /// Feed every history record; the rollout then holds the prediction for t_r + cadence.
    [[nodiscard]] Rollout warm_up(const HistoryBuffer& history) const;

    /// `steps` closed-loop steps. Rows are the predicted times with states
    /// plus the schedule torques applied at each row. Throws ScheduleGap.
    [[nodiscard]] Transient advance(Rollout& rollout, const strategy::TorqueSchedule& schedule, long steps) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static PrognosisModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static PrognosisModel load(const std::filesystem::path& path);
};

[[nodiscard]] PrognosisModel train_dtp(const scenario::Split& split, const PrognosisConfig& config,
                                       const std::string& database_fingerprint);
[[nodiscard]] PrognosisModel train_dtp(const scenario::Database& db, const PrognosisConfig& config);

/// Warm once, then roll every candidate forward independently from copies
/// of that state. Each result starts with the last history record (t_r)
/// and ends at t_r + horizon. Throws ScheduleGap when a schedule does not
/// cover [t_r, t_r + horizon].
[[nodiscard]] std::vector<Transient> predict_multistep(const PrognosisModel& model, const HistoryBuffer& history,
                                                       std::span<const strategy::TorqueSchedule> schedules,
                                                       double horizon);
/// Single-threaded reference for predict_multistep.
[[nodiscard]] std::vector<Transient> predict_multistep_serial(const PrognosisModel& model,
                                                              const HistoryBuffer& history,
                                                              std::span<const strategy::TorqueSchedule> schedules,
                                                              double horizon);

/// The realized torques of a recorded transient as a schedule.
[[nodiscard]] strategy::TorqueSchedule recorded_schedule(const Transient& tr);

/// Teacher-forced one-step error, scored after the burn-in.
[[nodiscard]] ErrorReport evaluate_one_step(const PrognosisModel& model, const std::vector<Transient>& transients);

/// Closed loop from t_r with `history` seconds of warm-up and the recorded
/// torques, scored on every predicted row up to the end of each transient.
[[nodiscard]] ErrorReport evaluate_closed_loop(const PrognosisModel& model, const std::vector<Transient>& transients,
                                               double t_r, double history);

struct HistoryPoint {
    double length = 0.0;
    ErrorReport report;
};

/// evaluate_closed_loop repeated for each history length at a common t_r.
[[nodiscard]] std::vector<HistoryPoint> history_sensitivity(const PrognosisModel& model,
                                                            const std::vector<Transient>& transients,
                                                            const std::vector<double>& lengths, double t_r);

} // namespace twinctl::dtp
