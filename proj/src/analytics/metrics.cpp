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

#include "twinctl/analytics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twinctl/common/error.hpp"

namespace twinctl::analytics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw EmptyInput("metric needs non-empty series");
    }
    if (a.size() != b.size()) {
        throw DimensionMismatch("series lengths differ: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    }
}

} // namespace

double mse(std::span<const double> predictions, std::span<const double> truths)
{
    check_pair(predictions, truths);
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        s += d * d;
    }
    return s / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const double> truths)
{
    return std::sqrt(mse(predictions, truths));
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    check_pair(x, y);
    if (x.size() < 2) {
        throw TooFew("pearson needs at least two points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw ZeroVariance("pearson: constant series");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace twinctl::analytics
