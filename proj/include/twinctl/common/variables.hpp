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
#include <string_view>

namespace twinctl::var {

// Column names of the plant state variables carried by every transient.
// PSP#1 is the pump that malfunctions, PSP#2 the one used for mitigation.
inline constexpr std::string_view time = "time_s";
inline constexpr std::string_view core_flow = "core_flow_kg_s";
inline constexpr std::string_view upper_plenum_temp = "upper_plenum_temp_c";
inline constexpr std::string_view hp_plenum_temp = "hp_plenum_temp_c";
inline constexpr std::string_view lp_plenum_temp = "lp_plenum_temp_c";
inline constexpr std::string_view psp1_torque = "psp1_torque_nm";
inline constexpr std::string_view psp2_torque = "psp2_torque_nm";
inline constexpr std::string_view core_power = "core_power_w";
inline constexpr std::string_view ihx_power = "ihx_power_w";
inline constexpr std::string_view pfcl_temp = "pfcl_temp_c";
inline constexpr std::string_view peak_clad_temp = "peak_clad_temp_c";

/// Every plant state variable, in CSV column order (after `time_s`).
inline constexpr std::array<std::string_view, 10> state_columns = {
    core_flow, upper_plenum_temp, hp_plenum_temp, lp_plenum_temp, psp1_torque,
    psp2_torque, core_power, ihx_power, pfcl_temp, peak_clad_temp,
};

/// Variables a plant sensor can measure directly (fuel and clad cannot).
inline constexpr std::array<std::string_view, 8> measurable = {
    core_flow, upper_plenum_temp, hp_plenum_temp, lp_plenum_temp,
    psp1_torque, psp2_torque, core_power, ihx_power,
};

} // namespace twinctl::var
