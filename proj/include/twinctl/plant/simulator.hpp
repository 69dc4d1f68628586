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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twinctl/common/piecewise_linear.hpp"
#include "twinctl/common/transient.hpp"
#include "twinctl/plant/params.hpp"
#include "twinctl/plant/state.hpp"

namespace twinctl::plant {

/// Equilibrium at `params.nominal_power` with both pumps at nominal torque.
/// The control-rod reactivity is set so the net reactivity is zero.
/// Throws NonConvergence if the equilibrium cannot be polished to tolerance.
[[nodiscard]] PlantState steady_state_init(const PlantParams& params);

/// Apply `commands` at the start of the step, then one RK4 step of size dt.
/// Throws NumericalBlowup when the state leaves the configured bounds.
[[nodiscard]] PlantState step(const PlantParams& params, const PlantState& state,
                              std::span<const ControlCommand> commands, double dt);

/// Simulator instance with an I&C interface. Torque setpoints come either
/// from the last SetTorque command or from a time profile attached to a pump;
/// profiles are evaluated at every RK4 stage so ramps are integrated exactly.
class PlantSimulator {
public:
    explicit PlantSimulator(PlantParams params);
    PlantSimulator(PlantParams params, PlantState initial);

    void apply(const ControlCommand& command);
    void set_torque_profile(int pump, PiecewiseLinear profile);
    void clear_torque_profile(int pump);

    /// Advance by one integrator step of the given size.
    void step(double dt);
    /// Advance with fixed integrator steps until `time` (must lie on the step grid
    /// within 1e-9 relative to the integrator dt).
    void advance_to(double time);

    [[nodiscard]] const PlantState& state() const { return state_; }
    [[nodiscard]] const PlantParams& params() const { return params_; }

private:
    PlantParams params_;
    PlantState state_;
    std::array<std::optional<PiecewiseLinear>, 2> profiles_;
};

/// Pump-0 malfunction and optional pump-1 mitigation, both as absolute
/// torque-vs-time profiles, run from the nominal equilibrium.
[[nodiscard]] Transient run_transient(const PlantParams& params, const PiecewiseLinear& malfunction,
                                      const std::optional<PiecewiseLinear>& mitigation,
                                      double t_end, double output_dt);

/// Sample the state variables of a state into a row appended to `out`.
void append_sample(const PlantState& state, Transient& out);

/// Empty transient with the standard state columns.
[[nodiscard]] Transient make_state_table();

/// Measurement model: each reading = true value + N(0, (C·|true|)²).
class SensorModel {
public:
    /// Defaults to every directly measurable variable.
    SensorModel();
    explicit SensorModel(std::vector<std::string> sensors);

    [[nodiscard]] SensorFrame read(const PlantState& state, double noise_fraction,
                                   std::uint64_t rng_seed) const;
    [[nodiscard]] std::span<const std::string> sensors() const { return sensors_; }

private:
    std::vector<std::string> sensors_;
};

[[nodiscard]] SensorFrame sensor_read(const PlantState& state, double noise_fraction,
                                      std::uint64_t rng_seed);

} // namespace twinctl::plant
