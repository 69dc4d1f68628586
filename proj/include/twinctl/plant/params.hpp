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

#include <string>

#include <nlohmann/json.hpp>

namespace twinctl::plant {

/// Coefficients of the lumped primary-loop surrogate.
///
/// The first block is the nominal operating point the model is calibrated to.
/// `calibrate()` derives the hydraulic, thermal and IHX coefficients so that
/// the nominal point is an exact equilibrium; the remaining blocks are free
/// model choices (time constants, feedback strengths, pump curves).
struct PlantParams {
    // nominal operating point
    double nominal_power = 6.0e7;          // W
    double nominal_flow = 469.8;           // kg/s, core outlet
    double nominal_torque = 636.57;        // N·m, each pump
    double inlet_temp_nominal = 344.4;     // °C
    double outlet_temp_nominal = 443.1;    // °C
    double pfcl_nominal = 605.8;           // °C
    double clad_nominal = 487.9;           // °C
    double coolant_heat_capacity = 1293.9; // J/(kg·K)

    // one-group point kinetics (prompt-jump form)
    double beta = 0.0065;
    double decay_constant = 0.08;   // 1/s
    double generation_time = 1e-7;  // s
    double fuel_temp_coeff = -1.8e-5;    // 1/K, on mean fuel temperature
    double coolant_temp_coeff = -0.6e-5; // 1/K, on mean core coolant temperature
    double scram_worth_beta = 10.0;      // inserted reactivity, in units of beta

    // pumps: I dω/dt = τ − k ω|ω|
    double nominal_pump_speed = 100.0;  // rad/s
    double pump_inertia = 76.388;       // kg·m², 12 s coast-down half time
    double motor_time_constant = 1.5;   // s, applied torque lag behind setpoint
    double nominal_pump_head = 3.0e5;   // Pa
    double core_pressure_fraction = 0.6;
    double flow_inertance = 1277.0;     // Pa·s²/kg, per pump branch
    double natural_circulation_flow = 14.0; // kg/s, thermal transport floor

    // thermal capacities, J/K
    double fuel_heat_capacity = 2.036e6;
    double clad_heat_capacity = 2.0e5;
    double core_coolant_heat_capacity = 3.88e5;
    double upper_plenum_heat_capacity = 5.2e6;
    double cold_pool_heat_capacity = 6.5e7;
    double hp_plenum_heat_capacity = 2.6e5;
    double lp_plenum_heat_capacity = 5.2e5;
    double hp_inlet_fraction = 0.85;     // share of core inlet drawn from the HP plenum
    double ihx_secondary_temp = 300.0;   // °C, intermediate-loop cold leg

    // derived by calibrate()
    double pump_load_coeff = 0.0;         // N·m·s², k
    double pump_head_coeff = 0.0;         // Pa·s², head = a ω|ω|
    double hydraulic_resistance = 0.0;    // Pa/(kg/s)², core + loop
    double branch_resistance = 0.0;       // Pa/(kg/s)², per pump branch
    double fuel_thermal_resistance = 0.0; // K/W, fuel centerline to clad
    double clad_thermal_resistance = 0.0; // K/W, clad to coolant
    double ihx_conductance = 0.0;         // W/K, UA
    double fuel_ref_temp = 0.0;           // °C, mean fuel temperature at zero feedback
    double coolant_ref_temp = 0.0;        // °C

    // integration and blow-up guards
    double integrator_dt = 0.05;          // s
    double max_temperature = 2500.0;      // °C
    double max_power_factor = 5.0;        // × nominal power
    double max_speed_factor = 5.0;        // × nominal pump speed

    /// Defaults, calibrated.
    static PlantParams nominal();

    /// Recompute the derived block from the nominal point.
    void calibrate();

    /// Throws InvalidParams on a non-physical parameterization.
    void validate() const;

    /// Stable fingerprint of every coefficient (FNV-1a over the JSON dump).
    [[nodiscard]] std::string fingerprint() const;
};

[[nodiscard]] nlohmann::json to_json(const PlantParams& p);

/// Nominal-point keys are applied first, then the model is re-calibrated
/// (unless `"calibrate": false`), then any explicitly given derived
/// coefficients override the calibrated values.
[[nodiscard]] PlantParams params_from_json(const nlohmann::json& j);

} // namespace twinctl::plant
