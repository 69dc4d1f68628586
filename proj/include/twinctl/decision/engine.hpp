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
#include "twinctl/common/transient.hpp"
#include "twinctl/strategy/inventory.hpp"

namespace twinctl::decision {

enum class Region { Best, Good, Bad };
enum class Attribute { Pfcl, Power, Torque };

[[nodiscard]] const char* to_string(Region r);

/// Region bounds, region rewards and attribute weights.
///
/// PFCL (°C): best (600, 615], good (615, 685] or (floor, 600], bad otherwise.
/// Power and pump-2 torque are scored on |x − nominal| / nominal:
/// best ≤ 10% / 25%, good up to 20% / 50%, bad beyond.
struct RewardSpec {
    double pfcl_best_lo = 600.0;
    double pfcl_best_hi = 615.0;
    double pfcl_good_hi = 685.0;
    double pfcl_floor = 550.0;
    double power_best = 0.10;
    double power_good = 0.20;
    double torque_best = 0.25;
    double torque_good = 0.50;
    double reward_best = 5.0;
    double reward_good = 1.0;
    double reward_bad = -10.0;
    std::array<double, 3> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; // pfcl, power, torque
    double nominal_power = 6.0e7;   // W
    double nominal_torque = 636.57; // N·m
    double discrepancy_limit = 0.10;

    void validate() const;
    [[nodiscard]] double reward(Region r) const;
};

[[nodiscard]] nlohmann::json to_json(const RewardSpec& s);
[[nodiscard]] RewardSpec reward_spec_from_json(const nlohmann::json& j, RewardSpec base = {});

/// `value` is °C for Pfcl and the relative variation for Power and Torque.
/// Non-finite values are Bad.
[[nodiscard]] Region classify_region(Attribute a, double value, const RewardSpec& spec);

struct RewardBreakdown {
    double pfcl = 0.0;
    double power = 0.0;
    double torque = 0.0;
    double total = 0.0;
    std::vector<std::array<Region, 3>> labels; // per sample
};

/// Per-sample rewards of each attribute (pfcl, power, torque).
[[nodiscard]] std::array<std::vector<double>, 3> reward_series(const Transient& tr, const RewardSpec& spec);

/// Rectangle rule: every sample but the last contributes reward × dt, so a
/// 0..250 s transient at 1 s spans exactly 250 s. The transient cadence must
/// equal dt (WindowMismatch otherwise).
[[nodiscard]] RewardBreakdown accumulate_rewards(const Transient& tr, const RewardSpec& spec, double dt);

struct CandidatePrediction {
    strategy::CandidateStrategy strategy;
    Transient transient; // assembled [0, horizon]: history then prediction
};

struct RankedCandidate {
    std::size_t index = 0; // position in the input list
    strategy::CandidateStrategy strategy;
    RewardBreakdown rewards;
};

/// Totals over the (tau2_end, t_trip) axes; NaN where no candidate was scored.
struct RewardGrid {
    std::vector<double> tau2_end;
    std::vector<double> t_trip;
    std::vector<std::vector<double>> total; // [tau2][t_trip]
    [[nodiscard]] CsvTable to_csv() const;
};

struct Recommendation {
    std::vector<RankedCandidate> ranked; // best first
    std::size_t chosen = 0;              // index into the input list
    RewardGrid grid;
    double t_rcmd = 0.0;
    [[nodiscard]] const RankedCandidate& best() const { return ranked.front(); }
};

/// Descending total; ties go to the smaller tau2_end, then the earlier t_trip.
/// Throws NoCandidates on an empty list.
[[nodiscard]] Recommendation rank_strategies(const std::vector<CandidatePrediction>& predictions,
                                             const RewardSpec& spec, double dt, double t_rcmd);

enum class Verdict { Continue, Scram };

struct DiscrepancyReport {
    double t_ck = 0.0;
    double rmse_power = 0.0; // W
    double rmse_pfcl = 0.0;  // °C
    double zeta_power = 0.0;
    double zeta_pfcl = 0.0;
    double limit = 0.10;
    Verdict verdict = Verdict::Continue;
};

[[nodiscard]] nlohmann::json to_json(const DiscrepancyReport& r);

/// Verdict from the two factors: Scram iff either exceeds the limit.
[[nodiscard]] Verdict discrepancy_verdict(double zeta_power, double zeta_pfcl, double limit);

/// RMSE of power and PFCL over [t_rcmd, t_ck], each divided by its
/// reference value. Throws WindowMismatch when the time stamps in the window
/// differ or the window is empty.
[[nodiscard]] DiscrepancyReport check_discrepancy(const Transient& expected, const Transient& observed, double t_rcmd,
                                                  double t_ck, double power_reference, double pfcl_reference,
                                                  double limit = 0.10);
/// References taken from the observed sample at t = 0.
[[nodiscard]] DiscrepancyReport check_discrepancy(const Transient& expected, const Transient& observed, double t_rcmd,
                                                  double t_ck, double limit = 0.10);

/// RMSE(predicted, realized) / normalizer. Throws ZeroNormalizer.
[[nodiscard]] double decision_error(const std::vector<double>& predicted, const std::vector<double>& realized,
                                    double normalizer);

struct DecisionErrorReport {
    std::array<double, 3> eps{}; // pfcl, power, torque
    double speed = 0.0;          // %/s
    double magnitude = 0.0;      // %
};

/// Per-attribute decision error between predicted and realized transients
/// over their shared samples; normalizer = spec.reward_best.
[[nodiscard]] DecisionErrorReport decision_error_report(const Transient& predicted, const Transient& realized,
                                                        const RewardSpec& spec, double speed, double magnitude);

} // namespace twinctl::decision
