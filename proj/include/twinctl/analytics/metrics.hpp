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

namespace twinctl::analytics {

/// Mean of squared residuals. Throws EmptyInput on empty input and
/// DimensionMismatch on a length mismatch.
[[nodiscard]] double mse(std::span<const double> predictions, std::span<const double> truths);
[[nodiscard]] double rmse(std::span<const double> predictions, std::span<const double> truths);

/// Population Pearson correlation, clamped to [-1, 1].
/// Throws ZeroVariance if either series is constant, TooFew below 2 points.
[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

} // namespace twinctl::analytics
