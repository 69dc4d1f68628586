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

#include <cmath>
#include <numbers>
#include <random>

namespace twinctl {

/// Uniform on [0, 1) from the top 53 bits; identical across standard libraries.
[[nodiscard]] inline double uniform01(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Box-Muller, one value per call (the partner value is discarded on purpose
/// so the stream position depends only on the call count).
[[nodiscard]] inline double standard_normal(std::mt19937_64& gen)
{
    const double u1 = 1.0 - uniform01(gen); // (0, 1]
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace twinctl
