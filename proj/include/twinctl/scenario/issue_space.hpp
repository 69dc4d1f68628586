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
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinctl/common/piecewise_linear.hpp"
#include "twinctl/common/transient.hpp"
#include "twinctl/plant/params.hpp"

namespace twinctl::scenario {

/// Sampling rule for one issue-space coordinate.
///
/// JSON forms: a bare number (fixed), {"values": [...]},
/// {"linspace": [lo, hi, count]}. Grid mode enumerates the listed values;
/// random mode draws uniformly over [min, max] of the rule.
struct SampleRule {
    std::vector<double> values;

    static SampleRule fixed(double v) { return {{v}}; }
    static SampleRule linspace(double lo, double hi, int count);

    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
};

/// End of a window: an absolute time, or an offset added to the window start.
struct EndRule {
    bool relative = false;
    SampleRule rule;
};

enum class SamplingMode { Grid, Random };

struct IssueSpaceSpec {
    SampleRule malfunction_magnitude = SampleRule::fixed(50.0); // % of nominal torque lost
    SampleRule malfunction_start = SampleRule::fixed(20.0);     // s
    EndRule malfunction_end{false, SampleRule::fixed(70.0)};    // s
    SampleRule mitigation_magnitude = SampleRule::fixed(100.0); // % of nominal torque
    SampleRule mitigation_start = SampleRule::fixed(50.0);      // s
    EndRule mitigation_end{true, SampleRule::fixed(50.0)};      // s
    double horizon = 250.0;   // s
    double output_dt = 1.0;   // s
    SamplingMode mode = SamplingMode::Grid;
    int random_count = 0;

    /// Throws InvalidSpec when a rule leaves the physical bounds.
    void validate() const;
    /// Number of points grid mode would produce (random mode: random_count).
    [[nodiscard]] std::size_t point_count() const;
};

/// One sampled scenario.
struct IssuePoint {
    double malfunction_magnitude = 0.0;
    double malfunction_start = 0.0;
    double malfunction_end = 0.0;
    double mitigation_magnitude = 100.0;
    double mitigation_start = 0.0;
    double mitigation_end = 0.0;

    [[nodiscard]] IssueParams to_params() const;
    static IssuePoint from_params(const IssueParams& params);
    bool operator==(const IssuePoint&) const = default;
};

/// Grid: Cartesian product in fixed axis order. Random: n independent
/// uniform draws. Throws EmptySpace if a rule has no values.
[[nodiscard]] std::vector<IssuePoint> sample_issue_space(const IssueSpaceSpec& spec, std::uint64_t seed);

/// True when every coordinate lies inside the corresponding rule's [min, max].
[[nodiscard]] bool contains(const IssueSpaceSpec& spec, const IssuePoint& point);

/// Linear torque ramps for pump 0 (loss) and pump 1 (mitigation).
[[nodiscard]] PiecewiseLinear malfunction_profile(const IssuePoint& point, double nominal_torque);
[[nodiscard]] PiecewiseLinear mitigation_profile(const IssuePoint& point, double nominal_torque);

/// Simulate one issue point from the nominal equilibrium.
[[nodiscard]] Transient simulate_point(const plant::PlantParams& params, const IssueSpaceSpec& spec,
                                       const IssuePoint& point);

[[nodiscard]] nlohmann::json to_json(const IssueSpaceSpec& spec);
[[nodiscard]] IssueSpaceSpec spec_from_json(const nlohmann::json& j);

} // namespace twinctl::scenario
