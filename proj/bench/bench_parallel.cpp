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

// Serial reference vs OpenMP path for the hot loops. On a single-core host
// the two should tie; the ratio is what to read on a multi-core machine.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "twinctl/analytics/density.hpp"
#include "twinctl/common/seed.hpp"
#include "twinctl/plant/params.hpp"
#include "twinctl/prognosis/prognosis.hpp"
#include "twinctl/scenario/database.hpp"

using namespace twinctl;

namespace {

scenario::IssueSpaceSpec small_space(int n)
{
    scenario::IssueSpaceSpec s;
    s.mode = scenario::SamplingMode::Random;
    s.random_count = n;
    s.malfunction_magnitude = {{10.0, 100.0}};
    s.malfunction_start = scenario::SampleRule::fixed(20.0);
    s.malfunction_end = {true, {{10.0, 200.0}}};
    s.mitigation_magnitude = {{100.0, 150.0}};
    s.mitigation_start = {{50.0, 100.0}};
    s.mitigation_end = {true, scenario::SampleRule::fixed(50.0)};
    return s;
}

analytics::Kde sample_kde()
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(20000);
    for (auto& v : x) v = n(rng);
    return analytics::Kde::fit(x);
}

struct Prognosis {
    dtp::PrognosisModel model;
    dtp::HistoryBuffer history;
    std::vector<strategy::TorqueSchedule> schedules;
};

const Prognosis& prognosis()
{
    static const auto p = [] {
        const auto db = scenario::generate_database(small_space(30), plant::PlantParams::nominal(), 5);
        dtp::PrognosisConfig c;
        c.train.hidden = 30;
        c.train.epochs_max = 2;
        auto m = dtp::train_dtp(db, c);
        auto h = dtp::HistoryBuffer::from_transient(db.transients.front(), c.states, c.actions, 38.0, 20.0);
        const auto grid = strategy::CandidateGrid::standard();
        const auto psp1 = PiecewiseLinear::ramp(20.0, 636.57, 70.0, 494.23);
        std::vector<strategy::TorqueSchedule> s;
        for (const auto& cand : grid.candidates()) {
            s.push_back(strategy::make_schedule(psp1, strategy::predict_psp2_curve(cand), 38.0, 250.0, 1.0));
        }
        return Prognosis{std::move(m), std::move(h), std::move(s)};
    }();
    return p;
}

void BM_KdeEvaluate_Serial(benchmark::State& st)
{
    const auto k = sample_kde();
    const analytics::Grid g{-6.0, 6.0, 4097};
    for (auto _ : st) benchmark::DoNotOptimize(k.evaluate_serial(g));
}
void BM_KdeEvaluate_OpenMP(benchmark::State& st)
{
    const auto k = sample_kde();
    const analytics::Grid g{-6.0, 6.0, 4097};
    for (auto _ : st) benchmark::DoNotOptimize(k.evaluate(g));
}

void BM_GenerateDatabase_Serial(benchmark::State& st)
{
    const auto spec = small_space(static_cast<int>(st.range(0)));
    const auto p = plant::PlantParams::nominal();
    for (auto _ : st) benchmark::DoNotOptimize(scenario::generate_database_serial(spec, p, 1));
}
void BM_GenerateDatabase_OpenMP(benchmark::State& st)
{
    const auto spec = small_space(static_cast<int>(st.range(0)));
    const auto p = plant::PlantParams::nominal();
    for (auto _ : st) benchmark::DoNotOptimize(scenario::generate_database(spec, p, 1));
}

void BM_PredictMultistep_Serial(benchmark::State& st)
{
    const auto& p = prognosis();
    for (auto _ : st) benchmark::DoNotOptimize(dtp::predict_multistep_serial(p.model, p.history, p.schedules, 212.0));
}
void BM_PredictMultistep_OpenMP(benchmark::State& st)
{
    const auto& p = prognosis();
    for (auto _ : st) benchmark::DoNotOptimize(dtp::predict_multistep(p.model, p.history, p.schedules, 212.0));
}

} // namespace

BENCHMARK(BM_KdeEvaluate_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeEvaluate_OpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateDatabase_Serial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateDatabase_OpenMP)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictMultistep_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictMultistep_OpenMP)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
