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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/common/csv.hpp"
#include "twinctl/orchestrator/session.hpp"

namespace twinctl::orch {

/// Batch of auto-accepted sessions over malfunction speed × magnitude.
struct CampaignSpec {
    std::vector<double> magnitudes{20, 30, 40, 50, 60, 70, 80, 90, 100}; // %
    std::vector<double> speeds{0.5, 1.0, 2.0, 5.0, 10.0};               // %/s
    bool include_demo = true; // adds the 22.36 % loss over 20–70 s
    SessionConfig base;       // malfunction and estimate are overwritten per case

    [[nodiscard]] std::vector<MalfunctionScenario> scenarios() const;
};

[[nodiscard]] nlohmann::json to_json(const CampaignSpec& s);
[[nodiscard]] CampaignSpec campaign_spec_from_json(const nlohmann::json& j, CampaignSpec base = {});

struct CaseResult {
    MalfunctionScenario scenario;
    Phase phase = Phase::Monitoring;
    std::string error; // non-empty when the case threw
    std::size_t candidates = 0;
    strategy::CandidateStrategy chosen;
    double peak_pfcl = 0.0;        // realized, °C
    double rmse_pfcl = 0.0;        // expected vs realized after t_rcmd, °C
    double rmse_power = 0.0;       // W
    std::array<double, 3> eps{};   // decision error: pfcl, power, torque
    double zeta_pfcl = 0.0;        // largest PFCL discrepancy factor over the checks
    double zeta_power = 0.0;       // same for core power
    double zeta_max = 0.0;         // max of the two
};

struct CampaignResult {
    std::vector<CaseResult> cases;

    [[nodiscard]] CsvTable to_csv() const;
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::size_t failures() const; // cases that threw
};

/// Score one finished session against the plant it drove.
[[nodiscard]] CaseResult score_case(const MalfunctionScenario& scenario, const SessionResult& r,
                                    const SessionConfig& config);

/// Cases run in parallel (one session per thread) unless `parallel` is false.
/// Results come back in scenarios() order either way.
[[nodiscard]] CampaignResult run_campaign(const CampaignSpec& spec, const Assets& assets, bool parallel = true);

} // namespace twinctl::orch
