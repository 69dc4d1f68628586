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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace twinctl::plant {

/// Full physical state of the surrogate at one instant.
///
/// `power`, `core_flow` and `ihx_power` are algebraic functions of the
/// integrated fields; they are refreshed after every step.
struct PlantState {
    double time = 0.0;             // s
    double power = 0.0;            // W
    double precursor = 0.0;        // delayed-neutron precursors, as equilibrium power (W)
    double fuel_temp = 0.0;        // °C, peak fuel centerline
    double clad_temp = 0.0;        // °C, peak cladding
    double core_outlet_temp = 0.0; // °C
    double upper_plenum_temp = 0.0;
    double cold_pool_temp = 0.0;
    double hp_plenum_temp = 0.0;
    double lp_plenum_temp = 0.0;
    std::array<double, 2> pump_speed{};      // rad/s
    std::array<double, 2> pump_torque{};     // N·m, applied motor torque
    std::array<double, 2> torque_setpoint{}; // N·m, commanded torque
    std::array<double, 2> branch_flow{};     // kg/s through each pump, may reverse
    double core_flow = 0.0;                  // kg/s
    double ihx_power = 0.0;                  // W
    double rod_reactivity = 0.0;             // external reactivity (absolute)
    bool scrammed = false;
};

struct SetTorque {
    int pump = 0;        // 0 = PSP#1, 1 = PSP#2
    double value = 0.0;  // N·m, ≥ 0
};

struct Scram {};

using ControlCommand = std::variant<SetTorque, Scram>;

/// One sensor sample: readings are ordered as the configured sensor list.
struct SensorFrame {
    double time = 0.0;
    std::vector<std::pair<std::string, double>> readings;
    bool noise_applied = false;

    /// Throws MissingFeature when the sensor is not in the frame.
    [[nodiscard]] double at(std::string_view name) const;
};

/// Value of a named plant variable (see twinctl::var) in a state.
[[nodiscard]] double read_variable(const PlantState& s, std::string_view name);

} // namespace twinctl::plant
