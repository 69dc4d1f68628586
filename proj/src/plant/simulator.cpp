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

#include "twinctl/plant/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::plant {

namespace {

constexpr int kDim = 14;
using Vec = std::array<double, kDim>;

enum Slot : int {
    kPrecursor, kFuel, kClad, kCoreOutlet, kUpperPlenum, kColdPool, kHpPlenum, kLpPlenum,
    kSpeed0, kSpeed1, kTorque0, kTorque1, kFlow0, kFlow1,
};

Vec pack(const PlantState& s)
{
    return {s.precursor, s.fuel_temp, s.clad_temp, s.core_outlet_temp, s.upper_plenum_temp,
            s.cold_pool_temp, s.hp_plenum_temp, s.lp_plenum_temp, s.pump_speed[0],
            s.pump_speed[1], s.pump_torque[0], s.pump_torque[1], s.branch_flow[0],
            s.branch_flow[1]};
}

void unpack(const Vec& y, PlantState& s)
{
    s.precursor = y[kPrecursor];
    s.fuel_temp = y[kFuel];
    s.clad_temp = y[kClad];
    s.core_outlet_temp = y[kCoreOutlet];
    s.upper_plenum_temp = y[kUpperPlenum];
    s.cold_pool_temp = y[kColdPool];
    s.hp_plenum_temp = y[kHpPlenum];
    s.lp_plenum_temp = y[kLpPlenum];
    s.pump_speed = {y[kSpeed0], y[kSpeed1]};
    s.pump_torque = {y[kTorque0], y[kTorque1]};
    s.branch_flow = {y[kFlow0], y[kFlow1]};
}

/// Flow used for heat transport: |W| above twice the natural-circulation
/// floor, a C¹ quadratic blend below it so transport never stalls.
double transport_flow(const PlantParams& p, double w)
{
    const double m = p.natural_circulation_flow;
    const double a = std::abs(w);
    return a >= 2.0 * m ? a : m + a * a / (4.0 * m);
}

struct Algebraic {
    double reactivity;
    double power;
    double core_flow;
    double transport;
    double inlet_temp;
    double effectiveness;
    double ihx_power;
};

Algebraic algebraic(const PlantParams& p, const Vec& y, double rod)
{
    Algebraic a{};
    a.core_flow = y[kFlow0] + y[kFlow1];
    a.transport = transport_flow(p, a.core_flow);
    a.inlet_temp = p.hp_inlet_fraction * y[kHpPlenum] + (1.0 - p.hp_inlet_fraction) * y[kLpPlenum];
    const double coolant_mean = 0.5 * (a.inlet_temp + y[kCoreOutlet]);
    // mean fuel temperature sits below the peak by half the coolant rise
    const double fuel_mean = y[kFuel] - 0.5 * (y[kCoreOutlet] - a.inlet_temp);
    a.reactivity = rod + p.fuel_temp_coeff * (fuel_mean - p.fuel_ref_temp) +
                   p.coolant_temp_coeff * (coolant_mean - p.coolant_ref_temp);
    const double margin = p.beta - a.reactivity;
    if (!(margin > 0.1 * p.beta)) {
        throw NumericalBlowup("reactivity approached prompt critical");
    }
    // prompt-jump approximation of one-group point kinetics
    a.power = p.beta * y[kPrecursor] / margin;
    const double capacity_rate = a.transport * p.coolant_heat_capacity;
    a.effectiveness = 1.0 - std::exp(-p.ihx_conductance / capacity_rate);
    a.ihx_power = a.effectiveness * capacity_rate * (y[kUpperPlenum] - p.ihx_secondary_temp);
    return a;
}

Vec derivative(const PlantParams& p, const Vec& y, double rod, const std::array<double, 2>& setpoint)
{
    const Algebraic a = algebraic(p, y, rod);
    const double cp = p.coolant_heat_capacity;
    const double wcp = a.transport * cp;
    const double q_fuel = (y[kFuel] - y[kClad]) / p.fuel_thermal_resistance;
    const double q_clad = (y[kClad] - y[kCoreOutlet]) / p.clad_thermal_resistance;
    const double ihx_outlet = y[kUpperPlenum] - a.effectiveness * (y[kUpperPlenum] - p.ihx_secondary_temp);

    Vec d{};
    d[kPrecursor] = p.decay_constant * (a.power - y[kPrecursor]);
    d[kFuel] = (a.power - q_fuel) / p.fuel_heat_capacity;
    d[kClad] = (q_fuel - q_clad) / p.clad_heat_capacity;
    d[kCoreOutlet] = (q_clad - wcp * (y[kCoreOutlet] - a.inlet_temp)) / p.core_coolant_heat_capacity;
    d[kUpperPlenum] = wcp * (y[kCoreOutlet] - y[kUpperPlenum]) / p.upper_plenum_heat_capacity;
    d[kColdPool] = wcp * (ihx_outlet - y[kColdPool]) / p.cold_pool_heat_capacity;
    d[kHpPlenum] = p.hp_inlet_fraction * wcp * (y[kColdPool] - y[kHpPlenum]) / p.hp_plenum_heat_capacity;
    d[kLpPlenum] =
        (1.0 - p.hp_inlet_fraction) * wcp * (y[kColdPool] - y[kLpPlenum]) / p.lp_plenum_heat_capacity;

    const double head_loss = p.hydraulic_resistance * a.core_flow * std::abs(a.core_flow);
    for (int i = 0; i < 2; ++i) {
        const double w = y[kSpeed0 + i];
        double dw = (y[kTorque0 + i] - p.pump_load_coeff * w * std::abs(w)) / p.pump_inertia;
        if (w <= 0.0 && dw < 0.0) {
            dw = 0.0; // anti-reverse rotation: locked rotor
        }
        d[kSpeed0 + i] = dw;
        d[kTorque0 + i] = (setpoint[i] - y[kTorque0 + i]) / p.motor_time_constant;
        const double q = y[kFlow0 + i];
        const double head = p.pump_head_coeff * w * std::abs(w);
        d[kFlow0 + i] = (head - p.branch_resistance * q * std::abs(q) - head_loss) / p.flow_inertance;
    }
    return d;
}

void refresh(const PlantParams& p, PlantState& s)
{
    const Vec y = pack(s);
    const Algebraic a = algebraic(p, y, s.rod_reactivity);
    s.power = a.power;
    s.core_flow = a.core_flow;
    s.ihx_power = a.ihx_power;
}

void check_bounds(const PlantParams& p, const PlantState& s)
{
    const double temps[] = {s.fuel_temp, s.clad_temp, s.core_outlet_temp, s.upper_plenum_temp,
                            s.cold_pool_temp, s.hp_plenum_temp, s.lp_plenum_temp};
    for (double t : temps) {
        if (!std::isfinite(t) || std::abs(t) > p.max_temperature) {
            throw NumericalBlowup("temperature out of bounds at t=" + std::to_string(s.time));
        }
    }
    const double power_cap = p.max_power_factor * std::max(p.nominal_power, 1.0);
    if (!std::isfinite(s.power) || s.power > power_cap || s.power < -1e-6 * power_cap) {
        throw NumericalBlowup("power out of bounds at t=" + std::to_string(s.time));
    }
    for (int i = 0; i < 2; ++i) {
        if (!std::isfinite(s.pump_speed[i]) ||
            std::abs(s.pump_speed[i]) > p.max_speed_factor * p.nominal_pump_speed ||
            !std::isfinite(s.branch_flow[i])) {
            throw NumericalBlowup("pump state out of bounds at t=" + std::to_string(s.time));
        }
    }
}

template <class Setpoint>
void rk4(const PlantParams& p, PlantState& s, double dt, Setpoint&& setpoint)
{
    const double t = s.time;
    const Vec y = pack(s);
    auto axpy = [](const Vec& base, const Vec& k, double h) {
        Vec out;
        for (int i = 0; i < kDim; ++i) {
            out[i] = base[i] + h * k[i];
        }
        return out;
    };
    const Vec k1 = derivative(p, y, s.rod_reactivity, setpoint(t));
    const Vec k2 = derivative(p, axpy(y, k1, 0.5 * dt), s.rod_reactivity, setpoint(t + 0.5 * dt));
    const Vec k3 = derivative(p, axpy(y, k2, 0.5 * dt), s.rod_reactivity, setpoint(t + 0.5 * dt));
    const Vec k4 = derivative(p, axpy(y, k3, dt), s.rod_reactivity, setpoint(t + dt));
    Vec next;
    for (int i = 0; i < kDim; ++i) {
        next[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    next[kSpeed0] = std::max(next[kSpeed0], 0.0);
    next[kSpeed1] = std::max(next[kSpeed1], 0.0);
    unpack(next, s);
    s.time = t + dt;
    refresh(p, s);
    check_bounds(p, s);
}

void apply_command(const PlantParams& p, PlantState& s, const ControlCommand& command)
{
    if (const auto* set = std::get_if<SetTorque>(&command)) {
        if (set->pump < 0 || set->pump > 1) {
            throw InvalidSpec("pump index must be 0 or 1");
        }
        if (!(set->value >= 0.0) || !std::isfinite(set->value)) {
            throw InvalidSpec("torque setpoint must be finite and non-negative");
        }
        s.torque_setpoint[set->pump] = set->value;
        return;
    }
    if (!s.scrammed) {
        s.rod_reactivity -= p.scram_worth_beta * p.beta;
        s.scrammed = true;
    }
    s.torque_setpoint = {0.0, 0.0};
    refresh(p, s);
}

} // namespace

PlantState steady_state_init(const PlantParams& p)
{
    p.validate();
    PlantState s;
    const double torque = p.nominal_torque;
    const double omega = std::sqrt(torque / p.pump_load_coeff);
    s.pump_speed = {omega, omega};
    s.pump_torque = {torque, torque};
    s.torque_setpoint = {torque, torque};
    const double head = p.pump_head_coeff * omega * omega;
    const double flow = std::sqrt(head / (0.25 * p.branch_resistance + p.hydraulic_resistance));
    s.branch_flow = {0.5 * flow, 0.5 * flow};

    const double power = p.nominal_power;
    const double wcp = transport_flow(p, flow) * p.coolant_heat_capacity;
    const double effectiveness = 1.0 - std::exp(-p.ihx_conductance / wcp);
    const double rise = power / wcp;
    const double outlet = p.ihx_secondary_temp + rise / effectiveness;
    const double inlet = outlet - rise;
    s.core_outlet_temp = outlet;
    s.upper_plenum_temp = outlet;
    s.cold_pool_temp = inlet;
    s.hp_plenum_temp = inlet;
    s.lp_plenum_temp = inlet;
    s.clad_temp = outlet + power * p.clad_thermal_resistance;
    s.fuel_temp = s.clad_temp + power * p.fuel_thermal_resistance;
    s.precursor = power;
    s.rod_reactivity = -(p.fuel_temp_coeff * (s.fuel_temp - 0.5 * rise - p.fuel_ref_temp) +
                         p.coolant_temp_coeff * (0.5 * (inlet + outlet) - p.coolant_ref_temp));

    // Newton polish on the full right-hand side.
    const std::array<double, 2> setpoint = s.torque_setpoint;
    Vec y = pack(s);
    auto scale_of = [](const Vec& v) {
        Vec sc;
        for (int i = 0; i < kDim; ++i) {
            sc[i] = std::max(std::abs(v[i]), 1.0);
        }
        return sc;
    };
    auto residual_norm = [&](const Vec& v, const Vec& sc) {
        const Vec d = derivative(p, v, s.rod_reactivity, setpoint);
        double r = 0.0;
        for (int i = 0; i < kDim; ++i) {
            r = std::max(r, std::abs(d[i]) / sc[i]);
        }
        return r;
    };
    constexpr double kTol = 1e-13;
    constexpr int kMaxIter = 30;
    int iter = 0;
    Vec sc = scale_of(y);
    while (residual_norm(y, sc) > kTol) {
        if (++iter > kMaxIter) {
            throw NonConvergence("steady state did not converge");
        }
        const Vec f0 = derivative(p, y, s.rod_reactivity, setpoint);
        Eigen::Matrix<double, kDim, kDim> jac;
        for (int j = 0; j < kDim; ++j) {
            Vec yp = y;
            const double h = 1e-7 * sc[j];
            yp[j] += h;
            const Vec fp = derivative(p, yp, s.rod_reactivity, setpoint);
            for (int i = 0; i < kDim; ++i) {
                jac(i, j) = (fp[i] - f0[i]) / h;
            }
        }
        Eigen::Matrix<double, kDim, 1> rhs;
        for (int i = 0; i < kDim; ++i) {
            rhs(i) = -f0[i];
        }
        const Eigen::Matrix<double, kDim, 1> dy = jac.fullPivLu().solve(rhs);
        if (!dy.allFinite()) {
            throw NonConvergence("singular equilibrium Jacobian");
        }
        for (int i = 0; i < kDim; ++i) {
            y[i] += dy(i);
        }
        sc = scale_of(y);
    }
    unpack(y, s);
    refresh(p, s);
    return s;
}

PlantState step(const PlantParams& params, const PlantState& state,
                std::span<const ControlCommand> commands, double dt)
{
    if (!(dt > 0.0 && dt <= 1.0)) {
        throw InvalidSpec("step size must lie in (0, 1] s");
    }
    PlantState s = state;
    for (const auto& c : commands) {
        apply_command(params, s, c);
    }
    rk4(params, s, dt, [&](double) { return s.torque_setpoint; });
    return s;
}

PlantSimulator::PlantSimulator(PlantParams params)
    : params_(std::move(params)), state_(steady_state_init(params_))
{
}

PlantSimulator::PlantSimulator(PlantParams params, PlantState initial)
    : params_(std::move(params)), state_(initial)
{
    params_.validate();
}

void PlantSimulator::apply(const ControlCommand& command)
{
    if (const auto* set = std::get_if<SetTorque>(&command)) {
        if (set->pump >= 0 && set->pump <= 1) {
            profiles_[set->pump].reset();
        }
    }
    else {
        profiles_ = {};
    }
    apply_command(params_, state_, command);
}

void PlantSimulator::set_torque_profile(int pump, PiecewiseLinear profile)
{
    if (pump < 0 || pump > 1) {
        throw InvalidSpec("pump index must be 0 or 1");
    }
    if (state_.scrammed) {
        return; // tripped pumps stay tripped
    }
    profiles_[pump] = std::move(profile);
}

void PlantSimulator::clear_torque_profile(int pump)
{
    if (pump >= 0 && pump <= 1) {
        if (profiles_[pump]) {
            state_.torque_setpoint[pump] = (*profiles_[pump])(state_.time);
        }
        profiles_[pump].reset();
    }
}

void PlantSimulator::step(double dt)
{
    if (!(dt > 0.0 && dt <= 1.0)) {
        throw InvalidSpec("step size must lie in (0, 1] s");
    }
    auto setpoint = [this](double t) {
        std::array<double, 2> sp = state_.torque_setpoint;
        for (int i = 0; i < 2; ++i) {
            if (profiles_[i]) {
                sp[i] = std::max((*profiles_[i])(t), 0.0);
            }
        }
        return sp;
    };
    rk4(params_, state_, dt, setpoint);
    for (int i = 0; i < 2; ++i) {
        if (profiles_[i]) {
            state_.torque_setpoint[i] = std::max((*profiles_[i])(state_.time), 0.0);
        }
    }
}

void PlantSimulator::advance_to(double time)
{
    const double dt = params_.integrator_dt;
    const double steps = (time - state_.time) / dt;
    const auto n = static_cast<long>(std::llround(steps));
    if (n < 0 || std::abs(steps - static_cast<double>(n)) > 1e-6) {
        throw InvalidSpec("advance target is not on the integrator grid");
    }
    for (long i = 0; i < n; ++i) {
        step(dt);
    }
    state_.time = time;
}

Transient make_state_table()
{
    Transient t;
    for (auto name : var::state_columns) {
        t.names.emplace_back(name);
    }
    t.columns.assign(t.names.size(), {});
    return t;
}

void append_sample(const PlantState& state, Transient& out)
{
    out.time.push_back(state.time);
    for (std::size_t c = 0; c < out.names.size(); ++c) {
        out.columns[c].push_back(read_variable(state, out.names[c]));
    }
}

Transient run_transient(const PlantParams& params, const PiecewiseLinear& malfunction,
                        const std::optional<PiecewiseLinear>& mitigation, double t_end,
                        double output_dt)
{
    if (!(t_end > 0.0) || !(output_dt > 0.0)) {
        throw InvalidSpec("t_end and output_dt must be positive");
    }
    const auto samples = static_cast<long>(std::llround(t_end / output_dt));
    PlantSimulator sim(params);
    if (!malfunction.empty()) {
        sim.set_torque_profile(0, malfunction);
    }
    if (mitigation && !mitigation->empty()) {
        sim.set_torque_profile(1, *mitigation);
    }
    Transient out = make_state_table();
    out.time.reserve(static_cast<std::size_t>(samples) + 1);
    append_sample(sim.state(), out);
    for (long i = 1; i <= samples; ++i) {
        sim.advance_to(static_cast<double>(i) * output_dt);
        append_sample(sim.state(), out);
    }
    return out;
}

double SensorFrame::at(std::string_view name) const
{
    for (const auto& [n, v] : readings) {
        if (n == name) {
            return v;
        }
    }
    throw MissingFeature("sensor frame has no reading '" + std::string(name) + "'");
}

double read_variable(const PlantState& s, std::string_view name)
{
    if (name == var::core_flow) return s.core_flow;
    if (name == var::upper_plenum_temp) return s.upper_plenum_temp;
    if (name == var::hp_plenum_temp) return s.hp_plenum_temp;
    if (name == var::lp_plenum_temp) return s.lp_plenum_temp;
    if (name == var::psp1_torque) return s.pump_torque[0];
    if (name == var::psp2_torque) return s.pump_torque[1];
    if (name == var::core_power) return s.power;
    if (name == var::ihx_power) return s.ihx_power;
    if (name == var::pfcl_temp) return s.fuel_temp;
    if (name == var::peak_clad_temp) return s.clad_temp;
    throw MissingFeature("unknown plant variable '" + std::string(name) + "'");
}

SensorModel::SensorModel()
{
    for (auto name : var::measurable) {
        sensors_.emplace_back(name);
    }
}

SensorModel::SensorModel(std::vector<std::string> sensors) : sensors_(std::move(sensors))
{
    for (const auto& s : sensors_) {
        if (std::find(var::measurable.begin(), var::measurable.end(), s) == var::measurable.end()) {
            throw MissingFeature("'" + s + "' is not a measurable plant variable");
        }
    }
}

SensorFrame SensorModel::read(const PlantState& state, double noise_fraction, std::uint64_t rng_seed) const
{
    if (!(noise_fraction >= 0.0)) {
        throw InvalidSpec("noise fraction must be non-negative");
    }
    SensorFrame frame;
    frame.time = state.time;
    frame.noise_applied = noise_fraction > 0.0;
    std::mt19937_64 gen(rng_seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    frame.readings.reserve(sensors_.size());
    for (const auto& name : sensors_) {
        double v = read_variable(state, name);
        if (frame.noise_applied) {
            v += noise_fraction * std::abs(v) * unit(gen);
        }
        frame.readings.emplace_back(name, v);
    }
    return frame;
}

SensorFrame sensor_read(const PlantState& state, double noise_fraction, std::uint64_t rng_seed)
{
    return SensorModel().read(state, noise_fraction, rng_seed);
}

} // namespace twinctl::plant
