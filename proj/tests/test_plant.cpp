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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/plant/simulator.hpp"

using namespace twinctl;
using namespace twinctl::plant;

namespace {

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1.0);
}

std::vector<double> fields(const PlantState& s)
{
    return {s.power, s.precursor, s.fuel_temp, s.clad_temp, s.core_outlet_temp, s.upper_plenum_temp,
            s.cold_pool_temp, s.hp_plenum_temp, s.lp_plenum_temp, s.pump_speed[0], s.pump_speed[1],
            s.pump_torque[0], s.pump_torque[1], s.branch_flow[0], s.branch_flow[1], s.core_flow, s.ihx_power};
}

PiecewiseLinear loss_ramp(double fraction, double t0, double t1)
{
    const double tau = PlantParams::nominal().nominal_torque;
    return PiecewiseLinear::ramp(t0, tau, t1, tau * (1.0 - fraction));
}

} // namespace

TEST(PlantInit, MatchesNominalPoint)
{
    const auto p = PlantParams::nominal();
    const auto s = steady_state_init(p);
    EXPECT_LT(rel(s.power, 6.0e7), 0.005);
    EXPECT_LT(rel(s.core_flow, 469.8), 0.005);
    EXPECT_LT(rel(s.fuel_temp, 605.8), 0.005);
    EXPECT_LT(rel(s.upper_plenum_temp, 443.1), 0.005);
    EXPECT_LT(rel(s.hp_plenum_temp, 344.4), 0.005);
    EXPECT_LT(rel(s.clad_temp, 487.9), 0.005);
}

TEST(PlantInit, EnergyBalanceCloses)
{
    const auto p = PlantParams::nominal();
    const auto s = steady_state_init(p);
    const double inlet = p.hp_inlet_fraction * s.hp_plenum_temp + (1.0 - p.hp_inlet_fraction) * s.lp_plenum_temp;
    const double transported = s.core_flow * p.coolant_heat_capacity * (s.core_outlet_temp - inlet);
    EXPECT_LT(rel(transported, s.power), 0.01);
    EXPECT_NEAR(s.core_outlet_temp - inlet, 98.7, 0.05);
    EXPECT_LT(rel(s.ihx_power, s.power), 0.01);
}

TEST(PlantInit, ZeroPowerIsIsothermal)
{
    auto p = PlantParams::nominal();
    p.nominal_power = 0.0;
    const auto s = steady_state_init(p);
    EXPECT_EQ(s.power, 0.0);
    for (double t : {s.fuel_temp, s.clad_temp, s.core_outlet_temp, s.upper_plenum_temp, s.lp_plenum_temp}) {
        EXPECT_NEAR(t, s.hp_plenum_temp, 1e-9);
    }
}

TEST(PlantInit, RejectsPositiveFeedback)
{
    auto p = PlantParams::nominal();
    p.fuel_temp_coeff = 1e-5;
    EXPECT_THROW((void)steady_state_init(p), InvalidParams);
}

TEST(PlantStep, EquilibriumHoldsForTenThousandSteps)
{
    const auto p = PlantParams::nominal();
    const auto s0 = steady_state_init(p);
    PlantState s = s0;
    for (int i = 0; i < 10000; ++i) {
        s = step(p, s, {}, p.integrator_dt);
    }
    const auto a = fields(s0);
    const auto b = fields(s);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LT(rel(b[i], a[i]), 1e-9) << "field " << i;
    }
}

TEST(PlantStep, SingleStepAnyDtIsFixedPoint)
{
    const auto p = PlantParams::nominal();
    const auto s0 = steady_state_init(p);
    for (double dt : {0.01, 0.05, 0.5, 1.0}) {
        const auto s = step(p, s0, {}, dt);
        const auto a = fields(s0);
        const auto b = fields(s);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_LT(rel(b[i], a[i]), 1e-9) << "dt " << dt << " field " << i;
        }
    }
}

TEST(PlantStep, RejectsBadDt)
{
    const auto p = PlantParams::nominal();
    const auto s0 = steady_state_init(p);
    EXPECT_ANY_THROW((void)step(p, s0, {}, 0.0));
    EXPECT_ANY_THROW((void)step(p, s0, {}, 1.5));
}

TEST(PlantStep, PumpTripSignPattern)
{
    const auto p = PlantParams::nominal();
    PlantSimulator sim(p);
    sim.apply(SetTorque{0, 0.0});
    double prev_flow = sim.state().core_flow;
    double peak_fuel = sim.state().fuel_temp;
    const double fuel0 = sim.state().fuel_temp;
    for (int i = 1; i <= 400; ++i) {
        sim.step(p.integrator_dt);
        EXPECT_LE(sim.state().core_flow, prev_flow + 1e-9) << "t=" << sim.state().time;
        prev_flow = sim.state().core_flow;
        peak_fuel = std::max(peak_fuel, sim.state().fuel_temp);
    }
    EXPECT_GT(peak_fuel, fuel0);
    sim.advance_to(60.0);
    EXPECT_LT(sim.state().power, p.nominal_power);
}

TEST(PlantStep, ScramDropsPower)
{
    const auto p = PlantParams::nominal();
    PlantSimulator sim(p);
    sim.apply(Scram{});
    EXPECT_TRUE(sim.state().scrammed);
    sim.advance_to(60.0);
    EXPECT_LT(sim.state().power, 0.1 * p.nominal_power);
    EXPECT_EQ(sim.state().torque_setpoint[0], 0.0);
    EXPECT_EQ(sim.state().torque_setpoint[1], 0.0);
}

TEST(PlantStep, FeedbackOpposesFuelHeating)
{
    const auto p = PlantParams::nominal();
    const auto tr = run_transient(p, loss_ramp(0.5, 10, 60), std::nullopt, 120, 1.0);
    const auto& pfcl = tr.column(var::pfcl_temp);
    const auto& power = tr.column(var::core_power);
    // fuel heats up, power falls: feedback reactivity is negative
    for (std::size_t i = 70; i < tr.size(); ++i) {
        ASSERT_GT(pfcl[i], p.pfcl_nominal);
        ASSERT_LT(power[i], p.nominal_power);
    }
}

TEST(PlantTransient, NoMalfunctionHoldsNominal)
{
    const auto p = PlantParams::nominal();
    const auto tr = run_transient(p, PiecewiseLinear::constant(p.nominal_torque), std::nullopt, 250, 1.0);
    ASSERT_EQ(tr.size(), 251u);
    for (const auto name : var::state_columns) {
        const auto& col = tr.column(name);
        for (double v : col) {
            ASSERT_LT(rel(v, col.front()), 1e-3) << name;
        }
    }
}

TEST(PlantTransient, HalfLossHeatsFuelAndCutsPower)
{
    const auto p = PlantParams::nominal();
    const auto tr = run_transient(p, loss_ramp(0.5, 10, 60), std::nullopt, 250, 1.0);
    const auto& pfcl = tr.column(var::pfcl_temp);
    const auto& power = tr.column(var::core_power);
    for (std::size_t i = 61; i < tr.size(); ++i) {
        ASSERT_GT(pfcl[i], p.pfcl_nominal) << "t=" << tr.time[i];
        ASSERT_LT(power[i], p.nominal_power) << "t=" << tr.time[i];
    }
}

TEST(PlantTransient, MitigationLowersTerminalPfcl)
{
    const auto p = PlantParams::nominal();
    const auto bare = run_transient(p, loss_ramp(0.5, 10, 60), std::nullopt, 250, 1.0);
    const auto mit = run_transient(p, loss_ramp(0.5, 10, 60),
                                   PiecewiseLinear::ramp(50, p.nominal_torque, 100, 1.5 * p.nominal_torque), 250, 1.0);
    EXPECT_LT(mit.column(var::pfcl_temp).back(), bare.column(var::pfcl_temp).back());
}

TEST(PlantTransient, HalvingDtConverges)
{
    auto p = PlantParams::nominal();
    const auto coarse = run_transient(p, loss_ramp(0.5, 10, 60), std::nullopt, 250, 1.0);
    p.integrator_dt = 0.025;
    const auto fine = run_transient(p, loss_ramp(0.5, 10, 60), std::nullopt, 250, 1.0);
    for (const auto name : var::state_columns) {
        EXPECT_LT(rel(coarse.column(name).back(), fine.column(name).back()), 1e-5) << name;
    }
}

TEST(PlantTransient, Deterministic)
{
    const auto p = PlantParams::nominal();
    const auto a = run_transient(p, loss_ramp(1.0, 20, 70), std::nullopt, 250, 1.0);
    const auto b = run_transient(p, loss_ramp(1.0, 20, 70), std::nullopt, 250, 1.0);
    EXPECT_EQ(a.columns, b.columns);
    EXPECT_EQ(a.time, b.time);
}

TEST(PlantTransient, CarriesEveryStateColumn)
{
    const auto p = PlantParams::nominal();
    const auto tr = run_transient(p, loss_ramp(0.2, 5, 10), std::nullopt, 20, 1.0);
    for (const auto name : var::state_columns) {
        EXPECT_TRUE(tr.has(name)) << name;
    }
    EXPECT_DOUBLE_EQ(tr.cadence(), 1.0);
}

TEST(PlantSensors, ZeroNoiseIsExact)
{
    const auto s = steady_state_init(PlantParams::nominal());
    const auto f = sensor_read(s, 0.0, 42);
    EXPECT_FALSE(f.noise_applied);
    EXPECT_EQ(f.readings.size(), var::measurable.size());
    for (const auto& [name, value] : f.readings) {
        EXPECT_EQ(value, read_variable(s, name)) << name;
    }
}

TEST(PlantSensors, NoiseStdMatchesFraction)
{
    const auto s = steady_state_init(PlantParams::nominal());
    const SensorModel model({std::string(var::upper_plenum_temp)});
    constexpr int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = model.read(s, 0.001, static_cast<std::uint64_t>(i) + 1).at(var::upper_plenum_temp);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(sd, 0.001 * s.upper_plenum_temp, 0.02 * 0.4431);
}

TEST(PlantSensors, FixedSeedRepeats)
{
    const auto s = steady_state_init(PlantParams::nominal());
    const auto a = sensor_read(s, 0.01, 99);
    const auto b = sensor_read(s, 0.01, 99);
    EXPECT_EQ(a.readings, b.readings);
    EXPECT_ANY_THROW((void)sensor_read(s, -0.1, 1));
}

TEST(PlantParamsJson, RoundTripAndOverrides)
{
    const auto p = PlantParams::nominal();
    const auto q = params_from_json(to_json(p));
    EXPECT_EQ(p.fingerprint(), q.fingerprint());
    const auto r = params_from_json({{"beta", 0.007}});
    EXPECT_EQ(r.beta, 0.007);
    EXPECT_NE(r.fingerprint(), p.fingerprint());
}
