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

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/common/piecewise_linear.hpp"
#include "twinctl/plant/params.hpp"

namespace twinctl::strategy {

/// Assumed shape of the ongoing pump-1 malfunction.
struct MalfunctionEstimate {
    double t_acc = 20.0;     // s, malfunction start
    double t1_end = 70.0;    // s, malfunction end
    double tau1_end = 494.23; // N·m, final pump-1 torque

    void validate() const;
};

/// Pump-2 mitigation: hold tau0 until t_trip, ramp to tau2_end at t2_end.
struct CandidateStrategy {
    double tau2_end = 636.57;
    double t_trip = 50.0;
    double t2_end = 100.0;
    double tau0 = 636.57;

    void validate() const;
    bool operator==(const CandidateStrategy&) const = default;
};

/// Both pump curves over [0, horizon] plus their samples at `cadence`.
struct TorqueSchedule {
    double t_rcmd = 0.0;
    double horizon = 250.0;
    double cadence = 1.0;
    PiecewiseLinear psp1;
    PiecewiseLinear psp2;
    std::vector<double> time;
    std::vector<double> psp1_samples;
    std::vector<double> psp2_samples;
};

/// Max allowed gap between the last measurement and tau1_end when the
/// malfunction is already over at t_rcmd: 5% of nominal torque.
inline constexpr double kPlateauTolerance = 0.05 * 636.57;
/// Applied torque lags its setpoint, so a malfunction that ended less than
/// this long before t_rcmd is still settling and is not held to the tolerance.
inline constexpr double kSettleTime = 5.0;

/// Measured (time, torque) samples up to and including t_rcmd, then linear
/// from the last measurement to tau1_end at t1_end, then constant.
/// If t1_end <= t_rcmd < t1_end + kSettleTime the curve instead reaches
/// tau1_end at t1_end + kSettleTime. Throws InvalidEstimate when
/// t1_end + kSettleTime <= t_rcmd and the last measurement differs from
/// tau1_end by more than kPlateauTolerance.
[[nodiscard]] PiecewiseLinear predict_psp1_curve(const std::vector<double>& times,
                                                 const std::vector<double>& torques,
                                                 const MalfunctionEstimate& estimate);

[[nodiscard]] PiecewiseLinear predict_psp2_curve(const CandidateStrategy& candidate);

[[nodiscard]] TorqueSchedule make_schedule(PiecewiseLinear psp1, PiecewiseLinear psp2, double t_rcmd,
                                           double horizon, double cadence);

struct CandidateGrid {
    std::vector<double> tau2_end;
    std::vector<double> t_trip;
    double ramp_duration = 50.0; // s
    double tau0 = 636.57;
    double tau2_min = 636.57;      // 100% of nominal
    double tau2_max = 1.8 * 636.57; // 180% of nominal

    /// 25 final torques over 100–150% of nominal × 12 trip times over 50–100 s.
    static CandidateGrid standard(double nominal_torque = 636.57);
    [[nodiscard]] std::vector<CandidateStrategy> candidates() const;
    [[nodiscard]] std::size_t size() const { return tau2_end.size() * t_trip.size(); }
};

[[nodiscard]] nlohmann::json to_json(const CandidateGrid& g);
[[nodiscard]] CandidateGrid grid_from_json(const nlohmann::json& j, double nominal_torque = 636.57);

/// Availability of a candidate given the diagnosed PFCL (°C).
using AvailabilityPredicate = std::function<bool(const CandidateStrategy&, double diagnosed_pfcl)>;

struct Candidate {
    CandidateStrategy strategy;
    TorqueSchedule schedule;
};

/// Grid members accepted by the predicate, in grid order (tau2_end major),
/// each with its schedule. Throws NoCandidates when none pass.
[[nodiscard]] std::vector<Candidate> enumerate_candidates(const CandidateGrid& grid, double diagnosed_pfcl,
                                                          const AvailabilityPredicate& available,
                                                          const PiecewiseLinear& psp1, double t_rcmd,
                                                          double horizon, double cadence);

/// Brute-force surrogate runs: for every grid candidate, the peak PFCL the
/// plant reaches under a reference malfunction.
struct ReferenceTable {
    struct Row {
        double tau2_end = 0.0;
        double t_trip = 0.0;
        double max_reachable_pfcl = 0.0;
    };
    std::vector<Row> rows;
    double nominal_pfcl = 605.8; // plant steady-state PFCL the rows are relative to

    [[nodiscard]] std::optional<double> lookup(const CandidateStrategy& c) const;
    void write_csv(const std::filesystem::path& path) const;
    static ReferenceTable read_csv(const std::filesystem::path& path, double nominal_pfcl);
};

[[nodiscard]] ReferenceTable build_reference_table(const plant::PlantParams& params, const CandidateGrid& grid,
                                                   const MalfunctionEstimate& reference, double horizon);

/// Available iff the tabulated peak, shifted by the diagnosed deviation from
/// nominal, stays below `limit`. Candidates missing from the table are rejected.
[[nodiscard]] AvailabilityPredicate table_predicate(ReferenceTable table, double limit = 685.0);

} // namespace twinctl::strategy
