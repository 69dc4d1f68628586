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

#include "twinctl/analytics/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "twinctl/analytics/metrics.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/random.hpp"
#include "twinctl/common/seed.hpp"

namespace twinctl::analytics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_space(const std::vector<ParamRange>& space)
{
    if (space.empty()) {
        throw InvalidSpec("parameter space is empty");
    }
    for (const auto& r : space) {
        if (!(r.hi >= r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
            throw InvalidSpec("parameter '" + r.name + "' needs finite bounds with hi >= lo");
        }
    }
}

double snap(const ParamRange& r, double v)
{
    v = std::clamp(v, r.lo, r.hi);
    return r.integer ? std::round(v) : v;
}

double draw_uniform(const ParamRange& r, std::mt19937_64& gen)
{
    return snap(r, r.lo + (r.hi - r.lo) * uniform01(gen));
}

std::string describe(const std::exception& e)
{
    return e.what();
}

/// Parzen density over [lo, hi]: Gaussian kernels at the observations plus
/// one uniform prior component.
struct Parzen {
    std::vector<double> centers;
    double h = 1.0;
    double lo = 0.0;
    double hi = 1.0;

    Parzen(std::vector<double> c, const ParamRange& r) : centers(std::move(c)), lo(r.lo), hi(r.hi)
    {
        const double width = std::max(hi - lo, 1e-12);
        double sd = 0.0;
        if (centers.size() > 1) {
            double m = 0.0;
            for (double v : centers) {
                m += v;
            }
            m /= static_cast<double>(centers.size());
            for (double v : centers) {
                sd += (v - m) * (v - m);
            }
            sd = std::sqrt(sd / static_cast<double>(centers.size() - 1));
        }
        // floor shrinks with the number of observations, as in the usual TPE prior
        const double floor = width / std::min(100.0, static_cast<double>(centers.size() + 1));
        h = std::clamp(1.06 * sd * std::pow(static_cast<double>(centers.size()), -0.2), floor, width);
    }

    [[nodiscard]] double pdf(double x) const
    {
        const double width = std::max(hi - lo, 1e-12);
        double s = 1.0 / width;
        for (double c : centers) {
            const double u = (x - c) / h;
            s += std::exp(-0.5 * u * u) / (h * std::sqrt(2.0 * std::numbers::pi));
        }
        return s / static_cast<double>(centers.size() + 1);
    }

    [[nodiscard]] double sample(std::mt19937_64& gen) const
    {
        const auto k = static_cast<std::size_t>(gen() % (centers.size() + 1));
        if (k == centers.size()) {
            return lo + (hi - lo) * uniform01(gen);
        }
        return centers[k] + h * standard_normal(gen);
    }
};

ParamPoint random_point(const std::vector<ParamRange>& space, std::mt19937_64& gen)
{
    ParamPoint p;
    for (const auto& r : space) {
        p[r.name] = draw_uniform(r, gen);
    }
    return p;
}

ParamPoint tpe_point(const std::vector<ParamRange>& space, const std::vector<Trial>& trials, const SmboConfig& c,
                     std::mt19937_64& gen)
{
    std::vector<const Trial*> ok;
    for (const auto& t : trials) {
        if (!t.failed) {
            ok.push_back(&t);
        }
    }
    if (ok.size() < 2) {
        return random_point(space, gen);
    }
    std::stable_sort(ok.begin(), ok.end(), [](const Trial* a, const Trial* b) { return a->objective < b->objective; });
    const auto n_good = std::max<std::size_t>(
        1, std::min(ok.size() - 1, static_cast<std::size_t>(std::ceil(c.gamma * static_cast<double>(ok.size())))));
    std::vector<Parzen> good;
    std::vector<Parzen> bad;
    for (const auto& r : space) {
        std::vector<double> g;
        std::vector<double> b;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            (i < n_good ? g : b).push_back(ok[i]->params.at(r.name));
        }
        good.emplace_back(std::move(g), r);
        bad.emplace_back(std::move(b), r);
    }
    ParamPoint best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.n_candidates; ++k) {
        ParamPoint cand;
        double s = 0.0;
        for (std::size_t j = 0; j < space.size(); ++j) {
            const double x = snap(space[j], good[j].sample(gen));
            cand[space[j].name] = x;
            s += std::log(good[j].pdf(x)) - std::log(bad[j].pdf(x));
        }
        if (s > best_score) {
            best_score = s;
            best = std::move(cand);
        }
    }
    return best;
}

} // namespace

std::vector<ParamRange> ranges_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ParseError("parameter space must be an object of name: {lo, hi, integer}");
    }
    std::vector<ParamRange> out;
    for (const auto& [name, v] : j.items()) {
        ParamRange r;
        r.name = name;
        if (v.is_array()) {
            if (v.size() != 2) {
                throw ParseError("range '" + name + "' must be [lo, hi]");
            }
            r.lo = v[0].get<double>();
            r.hi = v[1].get<double>();
        }
        else {
            r.lo = v.at("lo").get<double>();
            r.hi = v.at("hi").get<double>();
            r.integer = v.value("integer", false);
        }
        out.push_back(r);
    }
    check_space(out);
    return out;
}

SensitivityReport sensitivity_scan(const std::vector<ParamRange>& space, const ParamPoint& defaults,
                                   const Objective& objective, int n, std::uint64_t seed, int jobs)
{
    check_space(space);
    if (n < 10) {
        throw InvalidSpec("sensitivity scan needs at least 10 samples per parameter");
    }
    SensitivityReport report;
    for (std::size_t p = 0; p < space.size(); ++p) {
        const ParamRange& r = space[p];
        SensitivityEntry e;
        e.name = r.name;
        e.values.resize(static_cast<std::size_t>(n));
        e.errors.assign(static_cast<std::size_t>(n), kNaN);
        for (int i = 0; i < n; ++i) {
            std::mt19937_64 gen(derive_seed(seed, p * 100003u + static_cast<std::size_t>(i)));
            e.values[static_cast<std::size_t>(i)] = draw_uniform(r, gen);
        }
#pragma omp parallel for schedule(dynamic) num_threads(std::max(jobs, 1)) if (jobs > 1)
        for (int i = 0; i < n; ++i) {
            ParamPoint point = defaults;
            point[r.name] = e.values[static_cast<std::size_t>(i)];
            try {
                const double v = objective(point);
                e.errors[static_cast<std::size_t>(i)] = std::isfinite(v) ? v : kNaN;
            }
            catch (const std::exception&) {
                // recorded as NaN
            }
        }
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            if (std::isnan(e.errors[i])) {
                ++e.failures;
            }
            else {
                xs.push_back(e.values[i]);
                ys.push_back(e.errors[i]);
            }
        }
        if (static_cast<double>(xs.size()) < 0.8 * n) {
            throw ObjectiveFailures("parameter '" + r.name + "': " + std::to_string(e.failures) + " of " +
                                    std::to_string(n) + " samples failed");
        }
        try {
            e.pcc = pearson(xs, ys);
        }
        catch (const ZeroVariance&) {
            e.pcc = 0.0;
        }
        e.strong = std::abs(e.pcc) > 0.5;
        report.entries.push_back(std::move(e));
    }
    return report;
}

CsvTable SensitivityReport::to_csv() const
{
    CsvTable t;
    t.header = {"parameter", "value", "objective", "pcc", "strong"};
    for (const auto& e : entries) {
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            t.add_row({e.name, format_double(e.values[i]), std::isnan(e.errors[i]) ? "" : format_double(e.errors[i]),
                       format_double(e.pcc), e.strong ? "1" : "0"});
        }
    }
    return t;
}

HyperoptResult smbo_optimize(const Objective& objective, const std::vector<ParamRange>& space,
                             const SmboConfig& c, std::uint64_t seed, const std::optional<ParamPoint>& defaults)
{
    check_space(space);
    if (c.n_trials < 20 || c.n_startup < 1 || c.n_candidates < 1 || !(c.gamma > 0.0 && c.gamma < 1.0)) {
        throw InvalidSpec("smbo needs n_trials >= 20, positive startup and candidate counts, gamma in (0, 1)");
    }
    HyperoptResult result;
    for (int t = 0; t < c.n_trials; ++t) {
        std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(t)));
        Trial trial;
        trial.index = static_cast<std::size_t>(t);
        trial.params = t < c.n_startup ? random_point(space, gen) : tpe_point(space, result.trials, c, gen);
        try {
            trial.objective = objective(trial.params);
            if (!std::isfinite(trial.objective)) {
                throw Error("objective returned a non-finite value");
            }
        }
        catch (const std::exception& e) {
            trial.failed = true;
            trial.objective = kNaN;
            trial.error = describe(e);
        }
        result.trials.push_back(std::move(trial));
    }
    bool any = false;
    for (const auto& t : result.trials) {
        if (!t.failed && (!any || t.objective < result.best_objective)) {
            any = true;
            result.best_objective = t.objective;
            result.best_index = t.index;
            result.best_params = t.params;
        }
    }
    if (!any) {
        throw ObjectiveFailures("every smbo trial failed");
    }
    if (defaults) {
        try {
            result.default_objective = objective(*defaults);
        }
        catch (const std::exception&) {
            result.default_objective = std::nullopt;
        }
    }
    return result;
}

CsvTable HyperoptResult::to_csv() const
{
    CsvTable t;
    t.header = {"trial", "objective", "failed"};
    if (!trials.empty()) {
        for (const auto& [k, v] : trials.front().params) {
            t.header.push_back(k);
        }
    }
    for (const auto& tr : trials) {
        std::vector<std::string> row = {std::to_string(tr.index), tr.failed ? "" : format_double(tr.objective),
                                        tr.failed ? "1" : "0"};
        for (const auto& [k, v] : tr.params) {
            row.push_back(format_double(v));
        }
        t.add_row(std::move(row));
    }
    return t;
}

} // namespace twinctl::analytics
