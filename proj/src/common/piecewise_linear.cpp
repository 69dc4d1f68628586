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

#include "twinctl/common/piecewise_linear.hpp"

#include <algorithm>

#include "twinctl/common/error.hpp"

namespace twinctl {

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> points) : points_(std::move(points))
{
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].t < points_[i - 1].t) {
            throw InvalidSpec("piecewise-linear breakpoints must be time-ordered");
        }
    }
}

PiecewiseLinear PiecewiseLinear::constant(double value)
{
    return PiecewiseLinear({{0.0, value}});
}

PiecewiseLinear PiecewiseLinear::ramp(double t0, double from, double t1, double to)
{
    if (t1 < t0) {
        throw InvalidSpec("ramp end precedes ramp start");
    }
    return PiecewiseLinear({{t0, from}, {t1, to}});
}

double PiecewiseLinear::operator()(double t) const
{
    if (points_.empty()) {
        return 0.0;
    }
    if (t < points_.front().t) {
        return points_.front().value;
    }
    if (t >= points_.back().t) {
        return points_.back().value;
    }
    // first breakpoint strictly after t
    auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double x, const Breakpoint& b) { return x < b.t; });
    auto lo = hi - 1;
    const double span = hi->t - lo->t;
    if (span <= 0.0) {
        return hi->value;
    }
    const double w = (t - lo->t) / span;
    return lo->value + w * (hi->value - lo->value);
}

} // namespace twinctl
