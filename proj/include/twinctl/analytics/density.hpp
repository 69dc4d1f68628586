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

#include <functional>
#include <span>
#include <vector>

namespace twinctl::analytics {

/// Uniform evaluation grid, `points` nodes from lo to hi inclusive.
struct Grid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t points = 1025;

    [[nodiscard]] double step() const { return (hi - lo) / static_cast<double>(points - 1); }
    [[nodiscard]] double at(std::size_t i) const { return lo + step() * static_cast<double>(i); }
    /// Same span, half the step.
    [[nodiscard]] Grid refined() const { return {lo, hi, 2 * points - 1}; }
};

/// One-dimensional Gaussian kernel density estimate.
class Kde {
public:
    /// Bandwidth defaults to Silverman's rule 1.06·σ·n^(-1/5).
    /// Throws DegenerateSamples with fewer than two distinct values.
    static Kde fit(std::span<const double> samples, double bandwidth = 0.0);

    [[nodiscard]] double density(double x) const;
    /// Grid evaluation, OpenMP across grid nodes.
    [[nodiscard]] std::vector<double> evaluate(const Grid& grid) const;
    /// Single-threaded reference for evaluate().
    [[nodiscard]] std::vector<double> evaluate_serial(const Grid& grid) const;

    [[nodiscard]] double bandwidth() const { return h_; }
    [[nodiscard]] double min() const { return sorted_.front(); }
    [[nodiscard]] double max() const { return sorted_.back(); }
    [[nodiscard]] std::size_t size() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
    double h_ = 0.0;
};

/// Trapezoid integral of uniformly spaced values.
[[nodiscard]] double trapezoid(std::span<const double> values, double step);

/// Grid spanning both supports plus 3 bandwidths on each side.
[[nodiscard]] Grid shared_grid(const Kde& p, const Kde& q, std::size_t points = 1025);

using Density = std::function<double(double)>;

/// D_KL(p‖q) + D_KL(q‖p) by trapezoid on the grid, densities floored at
/// 1e-300. The grid is checked against its refinement: a change above 1%
/// throws GridTooCoarse. The refined value is returned.
[[nodiscard]] double sym_kl(const Density& p, const Density& q, const Grid& grid);
/// ½∫(√p − √q)², clamped to [0, 1]. Same grid check as sym_kl.
[[nodiscard]] double hellinger_sq(const Density& p, const Density& q, const Grid& grid);

/// KDE overloads: grid evaluation runs through Kde::evaluate.
[[nodiscard]] double sym_kl(const Kde& p, const Kde& q, const Grid& grid);
[[nodiscard]] double hellinger_sq(const Kde& p, const Kde& q, const Grid& grid);

/// Integrands on pre-evaluated grids (no refinement check).
[[nodiscard]] double sym_kl_values(std::span<const double> p, std::span<const double> q, double step);
[[nodiscard]] double hellinger_sq_values(std::span<const double> p, std::span<const double> q, double step);

} // namespace twinctl::analytics
