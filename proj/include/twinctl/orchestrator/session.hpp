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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/common/transient.hpp"
#include "twinctl/decision/engine.hpp"
#include "twinctl/diagnosis/diagnosis.hpp"
#include "twinctl/plant/params.hpp"
#include "twinctl/plant/simulator.hpp"
#include "twinctl/prognosis/prognosis.hpp"
#include "twinctl/strategy/inventory.hpp"

namespace twinctl::orch {

enum class Phase { Monitoring, PausedForRecommendation, AwaitingDecision, Executing, Checking, Completed, Scrammed };
enum class Mode { Interactive, AutoAccept };

[[nodiscard]] const char* to_string(Phase p);
[[nodiscard]] bool is_terminal(Phase p);

/// Linear loss of pump-1 torque from `start` to `end`.
struct MalfunctionScenario {
    double magnitude = 50.0; // % of nominal torque lost
    double start = 20.0;     // s
    double end = 70.0;       // s

    [[nodiscard]] double speed() const { return magnitude / (end - start); } // %/s
    /// Scenario with the loss spread at `speed` %/s from `start`.
    static MalfunctionScenario from_speed(double magnitude, double speed, double start = 20.0);
    void validate() const;
};

struct SessionConfig {
    plant::PlantParams plant = plant::PlantParams::nominal();
    MalfunctionScenario malfunction;
    /// Assumed malfunction shape; defaults to the scenario's own ramp.
    std::optional<strategy::MalfunctionEstimate> estimate;
    double t_rcmd = 38.0;
    std::vector<double> t_ck{100.0, 200.0};
    double horizon = 250.0;
    double cadence = 1.0;
    std::string dtd_model;
    std::string dtp_model;
    std::string reference_table; // CSV; empty = build from the plant
    strategy::CandidateGrid grid = strategy::CandidateGrid::standard();
    decision::RewardSpec reward;
    double availability_limit = 685.0; // °C
    double sensor_noise = 0.0;         // fraction of |reading|
    std::uint64_t seed = 1;
    double history = -1.0;             // s of DT-P warm-up; < 0 uses the model default
    Mode mode = Mode::AutoAccept;

    void validate() const;
    [[nodiscard]] strategy::MalfunctionEstimate effective_estimate() const;
};

[[nodiscard]] nlohmann::json to_json(const SessionConfig& c);
/// Unknown keys throw ParseError. Missing keys keep the values in `base`.
[[nodiscard]] SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig base = {});

/// Trained twins plus the availability table, shared read-only between sessions.
struct Assets {
    std::shared_ptr<const dtd::DiagnosisModel> dtd;
    std::shared_ptr<const dtp::PrognosisModel> dtp;
    std::shared_ptr<const strategy::ReferenceTable> table;

    /// Loads the config's model files; builds the table when no CSV is given.
    static Assets load(const SessionConfig& c);
};

struct Decision {
    enum class Kind { Accept, Override, Scram };
    Kind kind = Kind::Accept;
    std::optional<strategy::CandidateStrategy> candidate; // Override only

    [[nodiscard]] nlohmann::json to_json() const;
    /// {"action": "accept" | "override" | "scram", "candidate": {"tau2_end", "t_trip"}}.
    /// Throws InvalidDecision on anything else.
    static Decision from_json(const nlohmann::json& j);
};

struct Event {
    double t = 0.0; // simulation time
    std::string kind; // phase, recommendation, decision, discrepancy, scram, note
    nlohmann::json data;
};

struct Sample {
    double t = 0.0;
    std::vector<std::pair<std::string, double>> sensors;
    std::vector<std::pair<std::string, double>> diagnosed; // DT-D estimates
};

struct SessionResult {
    Phase phase = Phase::Monitoring;
    std::vector<Event> events;
    Transient realized; // true plant states each second
    Transient observed; // sensors, with DT-D estimates for the unobservable columns
    Transient expected; // chosen candidate: observed history then DT-P prediction
    std::optional<decision::Recommendation> recommendation;
    std::optional<Decision> decision;
    std::vector<decision::DiscrepancyReport> reports;
    std::string scram_reason;

    /// Transcript: everything above, deterministic for (config, seed, decisions).
    [[nodiscard]] nlohmann::json to_json(std::size_t top = 10) const;
};

/// One supervised run. Not thread-safe; callers serialize access.
class Session {
public:
    Session(SessionConfig config, Assets assets);

    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] double time() const { return sim_.state().time; }
    [[nodiscard]] const SessionConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<Event>& events() const { return result_.events; }
    [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }
    [[nodiscard]] const SessionResult& result() const { return result_; }
    /// Per-candidate assembled predictions, valid once a recommendation exists.
    [[nodiscard]] const std::vector<decision::CandidatePrediction>& predictions() const { return predictions_; }

    /// One unit of work: a 1 s plant advance (with any recommendation or
    /// check falling due). Returns false when waiting for a decision or done.
    bool step();
    /// Throws PhaseConflict outside AwaitingDecision and InvalidDecision for
    /// a candidate that is not in the recommendation.
    void decide(const Decision& d);

private:
    void record_sample();
    void recommend();
    void check(double t_ck);
    void scram(const std::string& reason);
    void set_phase(Phase p);
    void log(std::string kind, nlohmann::json data);
    [[nodiscard]] double diagnosed(const std::string& name) const;

    SessionConfig config_;
    Assets assets_;
    plant::PlantSimulator sim_;
    plant::SensorModel sensors_;
    Phase phase_ = Phase::Monitoring;
    std::vector<Sample> samples_;
    std::vector<plant::SensorFrame> frames_;
    std::vector<decision::CandidatePrediction> predictions_;
    std::vector<strategy::Candidate> candidates_;
    std::size_t next_check_ = 0;
    SessionResult result_;
};

using DecisionSource = std::function<Decision(const Session&)>;

[[nodiscard]] DecisionSource auto_accept();

/// Drive a session to a terminal phase, asking `source` at every decision point.
[[nodiscard]] SessionResult run_workflow(const SessionConfig& config, const Assets& assets,
                                         const DecisionSource& source);

} // namespace twinctl::orch
