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

#include "twinctl/analytics/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twinctl/common/error.hpp"

namespace twinctl::analytics {

namespace {

constexpr double kFloor = 1e-300;
constexpr double kCutoff = 8.0; // kernel support in bandwidths; exp(-32) is below rounding

void check_grid(const Grid& g)
{
    if (g.points < 3 || !(g.hi > g.lo) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) {
        throw InvalidSpec("evaluation grid needs at least 3 points and hi > lo");
    }
}

std::vector<double> sample_fn(const Density& f, const Grid& g)
{
    std::vector<double> out(g.points);
    for (std::size_t i = 0; i < g.points; ++i) {
        out[i] = f(g.at(i));
    }
    return out;
}

template <class Eval, class Metric>
double checked(Eval&& eval_p, Eval&& eval_q, const Grid& grid, Metric&& metric, const char* name)
{
    check_grid(grid);
    const Grid fine = grid.refined();
    const double coarse = metric(eval_p(grid), eval_q(grid), grid.step());
    const double refined = metric(eval_p(fine), eval_q(fine), fine.step());
    if (std::abs(refined - coarse) > 0.01 * std::abs(refined) + 1e-12) {
        throw GridTooCoarse(std::string(name) + ": halving the grid step moved the result from " +
                            std::to_string(coarse) + " to " + std::to_string(refined));
    }
    return refined;
}

} // namespace

Kde Kde::fit(std::span<const double> samples, double bandwidth)
{
    if (samples.size() < 2) {
        throw DegenerateSamples("KDE needs at least two samples");
    }
    Kde k;
    k.sorted_.assign(samples.begin(), samples.end());
    for (double v : k.sorted_) {
        if (!std::isfinite(v)) {
            throw DegenerateSamples("KDE samples must be finite");
        }
    }
    std::sort(k.sorted_.begin(), k.sorted_.end());
    if (k.sorted_.front() == k.sorted_.back()) {
        throw DegenerateSamples("KDE samples are all equal");
    }
    if (bandwidth > 0.0) {
        k.h_ = bandwidth;
        return k;
    }
    const auto n = static_cast<double>(k.sorted_.size());
    double mean = 0.0;
    for (double v : k.sorted_) {
        mean += v;
    }
    mean /= n;
    double ss = 0.0;
    for (double v : k.sorted_) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    k.h_ = 1.06 * sd * std::pow(n, -0.2);
    if (!(k.h_ > 0.0)) {
        throw DegenerateSamples("KDE bandwidth collapsed to zero");
    }
    return k;
}

double Kde::density(double x) const
{
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x - kCutoff * h_);
    const auto hi = std::upper_bound(lo, sorted_.end(), x + kCutoff * h_);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const double u = (x - *it) / h_;
        s += std::exp(-0.5 * u * u);
    }
    return s / (static_cast<double>(sorted_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
}

std::vector<double> Kde::evaluate(const Grid& grid) const
{
    check_grid(grid);
    std::vector<double> out(grid.points);
    const auto n = static_cast<long>(grid.points);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = density(grid.at(static_cast<std::size_t>(i)));
    }
    return out;
}

std::vector<double> Kde::evaluate_serial(const Grid& grid) const
{
    check_grid(grid);
    std::vector<double> out(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        out[i] = density(grid.at(i));
    }
    return out;
}

double trapezoid(std::span<const double> v, double step)
{
    if (v.size() < 2) {
        return 0.0;
    }
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        s += v[i];
    }
    return s * step;
}

Grid shared_grid(const Kde& p, const Kde& q, std::size_t points)
{
    const double pad = 3.0 * std::max(p.bandwidth(), q.bandwidth());
    return {std::min(p.min(), q.min()) - pad, std::max(p.max(), q.max()) + pad, points};
}

double sym_kl_values(std::span<const double> p, std::span<const double> q, double step)
{
    if (p.size() != q.size()) {
        throw DimensionMismatch("densities evaluated on different grids");
    }
    std::vector<double> f(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = std::max(p[i], kFloor);
        const double b = std::max(q[i], kFloor);
        // p·log(p/q) + q·log(q/p), folded
        f[i] = (a - b) * (std::log(a) - std::log(b));
    }
    return std::max(0.0, trapezoid(f, step));
}

double hellinger_sq_values(std::span<const double> p, std::span<const double> q, double step)
{
    if (p.size() != q.size()) {
        throw DimensionMismatch("densities evaluated on different grids");
    }
    std::vector<double> f(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(std::max(p[i], 0.0)) - std::sqrt(std::max(q[i], 0.0));
        f[i] = d * d;
    }
    return std::clamp(0.5 * trapezoid(f, step), 0.0, 1.0);
}

double sym_kl(const Density& p, const Density& q, const Grid& grid)
{
    auto ep = [&](const Grid& g) { return sample_fn(p, g); };
    auto eq = [&](const Grid& g) { return sample_fn(q, g); };
    return checked(std::function<std::vector<double>(const Grid&)>(ep),
                   std::function<std::vector<double>(const Grid&)>(eq), grid,
                   [](const auto& a, const auto& b, double h) { return sym_kl_values(a, b, h); }, "sym_kl");
}

double hellinger_sq(const Density& p, const Density& q, const Grid& grid)
{
    auto ep = [&](const Grid& g) { return sample_fn(p, g); };
    auto eq = [&](const Grid& g) { return sample_fn(q, g); };
    return checked(std::function<std::vector<double>(const Grid&)>(ep),
                   std::function<std::vector<double>(const Grid&)>(eq), grid,
                   [](const auto& a, const auto& b, double h) { return hellinger_sq_values(a, b, h); },
                   "hellinger_sq");
}

double sym_kl(const Kde& p, const Kde& q, const Grid& grid)
{
    auto ep = [&](const Grid& g) { return p.evaluate(g); };
    auto eq = [&](const Grid& g) { return q.evaluate(g); };
    return checked(std::function<std::vector<double>(const Grid&)>(ep),
                   std::function<std::vector<double>(const Grid&)>(eq), grid,
                   [](const auto& a, const auto& b, double h) { return sym_kl_values(a, b, h); }, "sym_kl");
}

double hellinger_sq(const Kde& p, const Kde& q, const Grid& grid)
{
    auto ep = [&](const Grid& g) { return p.evaluate(g); };
    auto eq = [&](const Grid& g) { return q.evaluate(g); };
    return checked(std::function<std::vector<double>(const Grid&)>(ep),
                   std::function<std::vector<double>(const Grid&)>(eq), grid,
                   [](const auto& a, const auto& b, double h) { return hellinger_sq_values(a, b, h); },
                   "hellinger_sq");
}

} // namespace twinctl::analytics
