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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "twinctl/analytics/coverage.hpp"
#include "twinctl/analytics/density.hpp"
#include "twinctl/analytics/metrics.hpp"
#include "twinctl/analytics/tuning.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/random.hpp"

using namespace twinctl;
using namespace twinctl::analytics;

namespace {

double normal_pdf(double x, double mu)
{
    return std::exp(-0.5 * (x - mu) * (x - mu)) / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<double> normal_samples(std::size_t n, double mu, double sd, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = mu + sd * standard_normal(gen);
    }
    return v;
}

Transient series(const std::string& name, std::vector<double> values)
{
    Transient t;
    t.time.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        t.time[i] = static_cast<double>(i);
    }
    t.add_column(name, std::move(values));
    return t;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

TEST(Metrics, HandExamples)
{
    const std::vector<double> p = {1, 2, 3};
    const std::vector<double> y = {1, 2, 5};
    EXPECT_NEAR(mse(p, y), 4.0 / 3.0, 1e-10);
    EXPECT_NEAR(rmse(p, y), 1.1547005383792515, 1e-10);
    EXPECT_EQ(mse(p, p), 0.0);
    EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4}), 0.9819805060619657, 1e-10);
    EXPECT_THROW((void)mse(std::vector<double>{}, std::vector<double>{}), EmptyInput);
    EXPECT_THROW((void)mse(p, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(Metrics, PearsonLinearAndBounds)
{
    std::vector<double> x(50);
    std::vector<double> a(50);
    std::vector<double> b(50);
    for (int i = 0; i < 50; ++i) {
        x[static_cast<std::size_t>(i)] = 0.37 * i - 2.0;
        a[static_cast<std::size_t>(i)] = 2.0 * x[static_cast<std::size_t>(i)] + 3.0;
        b[static_cast<std::size_t>(i)] = -x[static_cast<std::size_t>(i)];
    }
    EXPECT_NEAR(pearson(x, a), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, b), -1.0, 1e-12);
    EXPECT_THROW((void)pearson(x, std::vector<double>(50, 1.0)), ZeroVariance);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto u = normal_samples(30, 0, 1, s);
        const auto v = normal_samples(30, 0, 1, s + 99);
        const double r = pearson(u, v);
        EXPECT_LE(std::abs(r), 1.0);
        EXPECT_NEAR(rmse(u, v) * rmse(u, v), mse(u, v), 1e-12);
    }
}

TEST(Kde, StandardNormalPeak)
{
    const auto s = normal_samples(100000, 0, 1, 1);
    const auto k = Kde::fit(s);
    EXPECT_NEAR(k.density(0.0), 0.3989, 0.03 * 0.3989);
    const Grid g = shared_grid(k, k, 2049);
    EXPECT_NEAR(trapezoid(k.evaluate(g), g.step()), 1.0, 1e-3);
}

TEST(Kde, ParallelMatchesSerial)
{
    const auto k = Kde::fit(normal_samples(5000, 2, 3, 4));
    const Grid g = shared_grid(k, k, 513);
    EXPECT_EQ(k.evaluate(g), k.evaluate_serial(g));
}

TEST(Kde, RejectsDegenerateSamples)
{
    EXPECT_THROW((void)Kde::fit(std::vector<double>(10, 3.0)), DegenerateSamples);
    EXPECT_THROW((void)Kde::fit(std::vector<double>{1.0}), DegenerateSamples);
}

TEST(Divergence, GaussianClosedForms)
{
    const Density p = [](double x) { return normal_pdf(x, 0.0); };
    const Density q = [](double x) { return normal_pdf(x, 1.0); };
    const Grid g{-10, 11, 1025};
    EXPECT_NEAR(sym_kl(p, q, g), 1.0, 0.02);
    EXPECT_NEAR(hellinger_sq(p, q, g), 1.0 - std::exp(-0.125), 0.02 * 0.1175);
    EXPECT_NEAR(sym_kl(q, p, g), sym_kl(p, q, g), 1e-12);
    EXPECT_NEAR(hellinger_sq(q, p, g), hellinger_sq(p, q, g), 1e-12);
    EXPECT_LT(sym_kl(p, p, g), 1e-10);
    EXPECT_LT(hellinger_sq(p, p, g), 1e-10);
}

TEST(Divergence, CoarseGridRejected)
{
    const Density p = [](double x) { return normal_pdf(x, 0.0); };
    const Density q = [](double x) { return normal_pdf(x, 0.3) * 0.0 + std::exp(-0.5 * x * x / 0.0025) / (0.05 * std::sqrt(2 * std::numbers::pi)); };
    EXPECT_THROW((void)sym_kl(p, q, Grid{-10, 10, 5}), GridTooCoarse);
}

TEST(Divergence, KdeIdenticalIsZero)
{
    const auto k = Kde::fit(normal_samples(2000, 1, 2, 3));
    const Grid g = shared_grid(k, k);
    EXPECT_LT(sym_kl(k, k, g), 1e-10);
    EXPECT_LT(hellinger_sq(k, k, g), 1e-10);
}

TEST(Coverage, OrderingAndIdentity)
{
    const std::vector<Transient> ref = {series("x", normal_samples(4000, 0, 1, 1))};
    auto base = normal_samples(4000, 0, 1, 1);
    std::vector<double> half;
    for (std::size_t i = 0; i < base.size(); i += 2) {
        half.push_back(base[i]);
    }
    const std::vector<Transient> sub = {series("x", half)};
    const std::vector<Transient> shifted = {series("x", normal_samples(4000, 1.5, 1, 2))};
    const auto rep = coverage_report(ref, {{"same", &ref, 0.1}, {"sub", &sub, 0.2}, {"shifted", &shifted, 0.9}}, {"x"});
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_LT(rep.rows[0].sym_kl_mean, 1e-10);
    EXPECT_LT(rep.rows[0].hellinger_sq_mean, 1e-10);
    EXPECT_LT(rep.rows[1].sym_kl_mean, rep.rows[2].sym_kl_mean);
    EXPECT_LT(rep.rows[1].hellinger_sq_mean, rep.rows[2].hellinger_sq_mean);
    ASSERT_TRUE(rep.pcc_sym_kl.has_value());
    EXPECT_GT(*rep.pcc_sym_kl, 0.5);
    EXPECT_EQ(rep.to_csv().rows.size(), 6u);
}

TEST(Sensitivity, LinearAndNullParameters)
{
    const std::vector<ParamRange> space = {{"a", 0, 10, false}, {"b", 0, 1, false}};
    const ParamPoint defaults = {{"a", 5}, {"b", 0.5}};
    const auto rep = sensitivity_scan(space, defaults, [](const ParamPoint& p) { return 3.0 * p.at("a") + 1.0; }, 50, 8);
    ASSERT_EQ(rep.entries.size(), 2u);
    EXPECT_NEAR(rep.entries[0].pcc, 1.0, 1e-12);
    EXPECT_TRUE(rep.entries[0].strong);
    EXPECT_EQ(rep.entries[1].pcc, 0.0); // constant objective along b

    // objective independent of b up to noise
    const auto noisy = sensitivity_scan(
        space, defaults,
        [](const ParamPoint& p) {
            std::mt19937_64 g(static_cast<std::uint64_t>(p.at("b") * 1e9) + 17);
            return p.at("a") + uniform01(g);
        },
        50, 8);
    EXPECT_LT(std::abs(noisy.entries[1].pcc), 0.2);
}

TEST(Sensitivity, FailureBudget)
{
    const std::vector<ParamRange> space = {{"a", 0, 1, false}};
    EXPECT_THROW((void)sensitivity_scan(space, {}, [](const ParamPoint& p) -> double {
                     if (p.at("a") < 0.5) {
                         throw Error("boom");
                     }
                     return p.at("a");
                 }, 20, 1),
                 ObjectiveFailures);
    EXPECT_THROW((void)sensitivity_scan(space, {}, [](const ParamPoint&) { return 1.0; }, 5, 1), InvalidSpec);
}

TEST(Smbo, ConvexOracle)
{
    const std::vector<ParamRange> space = {{"x", 0, 10, false}};
    auto f = [](const ParamPoint& p) { return (p.at("x") - 3.0) * (p.at("x") - 3.0); };
    const auto r = smbo_optimize(f, space, SmboConfig{}, 11);
    EXPECT_LT(std::abs(r.best_params.at("x") - 3.0), 0.25);
    ASSERT_EQ(r.trials.size(), 100u);
    double best = 1e300;
    for (const auto& t : r.trials) {
        best = std::min(best, t.objective);
    }
    EXPECT_EQ(best, r.best_objective);
}

TEST(Smbo, TwentyTrialsIsRandomSearch)
{
    const std::vector<ParamRange> space = {{"x", 0, 10, false}};
    auto f = [](const ParamPoint& p) { return (p.at("x") - 3.0) * (p.at("x") - 3.0); };
    SmboConfig c;
    c.n_trials = 20;
    const auto a = smbo_optimize(f, space, c, 5);
    const auto b = smbo_optimize(f, space, c, 5);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(a.trials[i].params, b.trials[i].params);
        EXPECT_EQ(a.trials[i].objective, b.trials[i].objective);
    }
    c.n_trials = 19;
    EXPECT_THROW((void)smbo_optimize(f, space, c, 5), InvalidSpec);
}

TEST(Smbo, BeatsRandomSearchInMedian)
{
    const std::vector<ParamRange> space = {{"x", 0, 10, false}, {"y", -5, 5, false}};
    auto f = [](const ParamPoint& p) {
        return (p.at("x") - 3.0) * (p.at("x") - 3.0) + (p.at("y") + 1.0) * (p.at("y") + 1.0);
    };
    SmboConfig tpe;
    tpe.n_trials = 60;
    SmboConfig rnd = tpe;
    rnd.n_startup = 60;
    std::vector<double> a;
    std::vector<double> b;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        a.push_back(smbo_optimize(f, space, tpe, s).best_objective);
        b.push_back(smbo_optimize(f, space, rnd, s).best_objective);
    }
    EXPECT_LE(median(a), median(b));
}

TEST(Smbo, FailedTrialsExcluded)
{
    const std::vector<ParamRange> space = {{"n", 1, 10, true}};
    auto f = [](const ParamPoint& p) -> double {
        if (p.at("n") > 8) {
            throw Error("too big");
        }
        return std::abs(p.at("n") - 4.0);
    };
    const auto r = smbo_optimize(f, space, SmboConfig{}, 2, ParamPoint{{"n", 6}});
    EXPECT_EQ(r.best_params.at("n"), 4.0);
    EXPECT_EQ(r.default_objective.value(), 2.0);
    for (const auto& t : r.trials) {
        EXPECT_EQ(t.params.at("n"), std::round(t.params.at("n")));
        EXPECT_EQ(t.failed, t.params.at("n") > 8);
    }
}
