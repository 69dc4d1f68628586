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

#include <span>
#include <vector>

namespace twinctl {

struct Breakpoint {
    double t = 0.0;
    double value = 0.0;
};

/// Piecewise-linear function of time, held constant outside its breakpoints.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    /// Breakpoints must have non-decreasing times; equal times encode a jump.
    explicit PiecewiseLinear(std::vector<Breakpoint> points);

    static PiecewiseLinear constant(double value);
    /// `from` before t0, linear to `to` over [t0, t1], `to` afterwards.
    static PiecewiseLinear ramp(double t0, double from, double t1, double to);

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] std::span<const Breakpoint> points() const { return points_; }
    [[nodiscard]] bool empty() const { return points_.empty(); }

private:
    std::vector<Breakpoint> points_;
};

} // namespace twinctl
