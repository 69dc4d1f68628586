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

#include "twinctl/plant/params.hpp"

#include <cmath>
#include <cstdio>

#include "twinctl/common/error.hpp"
#include "twinctl/common/seed.hpp"

namespace twinctl::plant {

namespace {

// Keys and members in one table so JSON load/save stay in sync.
struct Field {
    const char* key;
    double PlantParams::*member;
    bool derived;
};

constexpr Field kFields[] = {
    {"nominal_power", &PlantParams::nominal_power, false},
    {"nominal_flow", &PlantParams::nominal_flow, false},
    {"nominal_torque", &PlantParams::nominal_torque, false},
    {"inlet_temp_nominal", &PlantParams::inlet_temp_nominal, false},
    {"outlet_temp_nominal", &PlantParams::outlet_temp_nominal, false},
    {"pfcl_nominal", &PlantParams::pfcl_nominal, false},
    {"clad_nominal", &PlantParams::clad_nominal, false},
    {"coolant_heat_capacity", &PlantParams::coolant_heat_capacity, false},
    {"beta", &PlantParams::beta, false},
    {"decay_constant", &PlantParams::decay_constant, false},
    {"generation_time", &PlantParams::generation_time, false},
    {"fuel_temp_coeff", &PlantParams::fuel_temp_coeff, false},
    {"coolant_temp_coeff", &PlantParams::coolant_temp_coeff, false},
    {"scram_worth_beta", &PlantParams::scram_worth_beta, false},
    {"nominal_pump_speed", &PlantParams::nominal_pump_speed, false},
    {"pump_inertia", &PlantParams::pump_inertia, false},
    {"motor_time_constant", &PlantParams::motor_time_constant, false},
    {"nominal_pump_head", &PlantParams::nominal_pump_head, false},
    {"core_pressure_fraction", &PlantParams::core_pressure_fraction, false},
    {"flow_inertance", &PlantParams::flow_inertance, false},
    {"natural_circulation_flow", &PlantParams::natural_circulation_flow, false},
    {"fuel_heat_capacity", &PlantParams::fuel_heat_capacity, false},
    {"clad_heat_capacity", &PlantParams::clad_heat_capacity, false},
    {"core_coolant_heat_capacity", &PlantParams::core_coolant_heat_capacity, false},
    {"upper_plenum_heat_capacity", &PlantParams::upper_plenum_heat_capacity, false},
    {"cold_pool_heat_capacity", &PlantParams::cold_pool_heat_capacity, false},
    {"hp_plenum_heat_capacity", &PlantParams::hp_plenum_heat_capacity, false},
    {"lp_plenum_heat_capacity", &PlantParams::lp_plenum_heat_capacity, false},
    {"hp_inlet_fraction", &PlantParams::hp_inlet_fraction, false},
    {"ihx_secondary_temp", &PlantParams::ihx_secondary_temp, false},
    {"integrator_dt", &PlantParams::integrator_dt, false},
    {"max_temperature", &PlantParams::max_temperature, false},
    {"max_power_factor", &PlantParams::max_power_factor, false},
    {"max_speed_factor", &PlantParams::max_speed_factor, false},
    {"pump_load_coeff", &PlantParams::pump_load_coeff, true},
    {"pump_head_coeff", &PlantParams::pump_head_coeff, true},
    {"hydraulic_resistance", &PlantParams::hydraulic_resistance, true},
    {"branch_resistance", &PlantParams::branch_resistance, true},
    {"fuel_thermal_resistance", &PlantParams::fuel_thermal_resistance, true},
    {"clad_thermal_resistance", &PlantParams::clad_thermal_resistance, true},
    {"ihx_conductance", &PlantParams::ihx_conductance, true},
    {"fuel_ref_temp", &PlantParams::fuel_ref_temp, true},
    {"coolant_ref_temp", &PlantParams::coolant_ref_temp, true},
};

} // namespace

PlantParams PlantParams::nominal()
{
    PlantParams p;
    p.calibrate();
    return p;
}

void PlantParams::calibrate()
{
    if (nominal_power <= 0.0 || nominal_flow <= 0.0 || nominal_torque <= 0.0 ||
        nominal_pump_speed <= 0.0 || coolant_heat_capacity <= 0.0) {
        throw InvalidParams("calibration needs a positive nominal power, flow, torque, speed and cp");
    }
    const double w0 = nominal_flow;
    const double omega0 = nominal_pump_speed;

    pump_load_coeff = nominal_torque / (omega0 * omega0);
    pump_head_coeff = nominal_pump_head / (omega0 * omega0);
    hydraulic_resistance = core_pressure_fraction * nominal_pump_head / (w0 * w0);
    branch_resistance = (1.0 - core_pressure_fraction) * nominal_pump_head / (0.25 * w0 * w0);

    // Outlet follows from the energy balance with the configured cp.
    const double rise = nominal_power / (w0 * coolant_heat_capacity);
    const double outlet = inlet_temp_nominal + rise;
    fuel_thermal_resistance = (pfcl_nominal - clad_nominal) / nominal_power;
    clad_thermal_resistance = (clad_nominal - outlet) / nominal_power;

    const double effectiveness = rise / (outlet - ihx_secondary_temp);
    if (!(effectiveness > 0.0 && effectiveness < 1.0)) {
        throw InvalidParams("IHX secondary temperature incompatible with the nominal point");
    }
    ihx_conductance = -std::log(1.0 - effectiveness) * w0 * coolant_heat_capacity;

    fuel_ref_temp = pfcl_nominal - 0.5 * rise;
    coolant_ref_temp = 0.5 * (inlet_temp_nominal + outlet);
}

void PlantParams::validate() const
{
    if (!(fuel_temp_coeff < 0.0) || !(coolant_temp_coeff < 0.0)) {
        throw InvalidParams("reactivity feedback coefficients must be strictly negative");
    }
    if (nominal_power < 0.0) {
        throw InvalidParams("power must be non-negative");
    }
    const double positives[] = {
        beta, decay_constant, generation_time, nominal_pump_speed, pump_inertia,
        motor_time_constant, flow_inertance, natural_circulation_flow, fuel_heat_capacity,
        clad_heat_capacity, core_coolant_heat_capacity, upper_plenum_heat_capacity,
        cold_pool_heat_capacity, hp_plenum_heat_capacity, lp_plenum_heat_capacity,
        pump_load_coeff, pump_head_coeff, hydraulic_resistance, branch_resistance,
        fuel_thermal_resistance, clad_thermal_resistance, ihx_conductance, integrator_dt,
        coolant_heat_capacity,
    };
    for (double v : positives) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidParams("plant coefficient must be positive and finite (was the model calibrated?)");
        }
    }
    if (hp_inlet_fraction < 0.0 || hp_inlet_fraction > 1.0) {
        throw InvalidParams("hp_inlet_fraction must lie in [0, 1]");
    }
}

std::string PlantParams::fingerprint() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(to_json(*this).dump())));
    return buf;
}

nlohmann::json to_json(const PlantParams& p)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : kFields) {
        j[f.key] = p.*(f.member);
    }
    return j;
}

PlantParams params_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ParseError("plant params must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "calibrate") {
            continue;
        }
        bool known = false;
        for (const auto& f : kFields) {
            known = known || key == f.key;
        }
        if (!known) {
            throw ParseError("unknown plant parameter '" + key + "'");
        }
    }
    PlantParams p;
    for (const auto& f : kFields) {
        if (!f.derived && j.contains(f.key)) {
            p.*(f.member) = j.at(f.key).get<double>();
        }
    }
    if (j.value("calibrate", true)) {
        p.calibrate();
    }
    for (const auto& f : kFields) {
        if (f.derived && j.contains(f.key)) {
            p.*(f.member) = j.at(f.key).get<double>();
        }
    }
    p.validate();
    return p;
}

} // namespace twinctl::plant
