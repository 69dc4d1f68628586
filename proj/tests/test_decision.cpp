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

#include <cmath>
#include <random>

#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/decision/engine.hpp"

using namespace twinctl;
using namespace twinctl::decision;

namespace {

Transient flat(double pfcl, double power, double torque, double t_end = 250.0)
{
    Transient t;
    for (double s = 0.0; s <= t_end + 1e-9; s += 1.0) {
        t.time.push_back(s);
    }
    const std::size_t n = t.time.size();
    t.add_column(std::string(var::pfcl_temp), std::vector<double>(n, pfcl));
    t.add_column(std::string(var::core_power), std::vector<double>(n, power));
    t.add_column(std::string(var::psp2_torque), std::vector<double>(n, torque));
    return t;
}

} // namespace

TEST(Regions, DocumentedExamples)
{
    const RewardSpec s;
    EXPECT_EQ(classify_region(Attribute::Pfcl, 608.7, s), Region::Best);
    EXPECT_EQ(classify_region(Attribute::Pfcl, 700.0, s), Region::Bad);
    EXPECT_EQ(classify_region(Attribute::Pfcl, 685.0, s), Region::Good);
    EXPECT_EQ(classify_region(Attribute::Pfcl, 615.0, s), Region::Best);
    EXPECT_EQ(classify_region(Attribute::Pfcl, 600.0, s), Region::Good);
    EXPECT_EQ(classify_region(Attribute::Pfcl, 550.0, s), Region::Bad);
    EXPECT_EQ(classify_region(Attribute::Power, 0.15, s), Region::Good);
    EXPECT_EQ(classify_region(Attribute::Power, -0.10, s), Region::Best);
    EXPECT_EQ(classify_region(Attribute::Torque, 0.5, s), Region::Good);
    EXPECT_EQ(classify_region(Attribute::Torque, 0.5000001, s), Region::Bad);
    EXPECT_EQ(classify_region(Attribute::Pfcl, std::nan(""), s), Region::Bad);
}

TEST(Regions, PartitionOnRandomDraws)
{
    const RewardSpec s;
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> pf(400.0, 800.0);
    std::uniform_real_distribution<double> var(-1.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
        const double v = pf(gen);
        const int hits = (v > 600 && v <= 615) + ((v > 615 && v <= 685) || (v > 550 && v <= 600)) + (v > 685 || v <= 550);
        ASSERT_EQ(hits, 1);
        const Region r = classify_region(Attribute::Pfcl, v, s);
        ASSERT_EQ(r == Region::Best, v > 600 && v <= 615) << v;
        const double d = var(gen);
        const Region p = classify_region(Attribute::Power, d, s);
        ASSERT_EQ(p == Region::Best, std::abs(d) <= 0.10);
        ASSERT_EQ(p == Region::Bad, std::abs(d) > 0.20);
    }
}

TEST(Rewards, ConstantIntegrands)
{
    const RewardSpec s;
    const auto best = accumulate_rewards(flat(608, 6e7, 636.57), s, 1.0);
    EXPECT_EQ(best.total, 1250.0);
    EXPECT_EQ(best.labels.size(), 251u);
    const auto bad = accumulate_rewards(flat(700, 1e7, 100), s, 1.0);
    EXPECT_EQ(bad.total, -2500.0);
    const auto mixed = accumulate_rewards(flat(608, 6e7 * 1.15, 636.57 * 1.3), s, 1.0);
    EXPECT_NEAR(mixed.total, 583.3333333333333, 1e-9);
    EXPECT_EQ(mixed.pfcl, 1250.0);
    EXPECT_EQ(mixed.power, 250.0);
    EXPECT_THROW((void)accumulate_rewards(flat(608, 6e7, 636.57), s, 0.5), WindowMismatch);
}

TEST(Rewards, SpecJson)
{
    RewardSpec s;
    s.weights = {0.5, 0.25, 0.25};
    EXPECT_EQ(reward_spec_from_json(to_json(s)).weights, s.weights);
    EXPECT_THROW((void)reward_spec_from_json({{"weights", {0.5, 0.5, 0.5}}}), InvalidSpec);
    EXPECT_THROW((void)reward_spec_from_json({{"nope", 1}}), ParseError);
}

TEST(Ranking, TieBreakAndSingle)
{
    const RewardSpec s;
    std::vector<CandidatePrediction> one = {{{700, 60, 110, 636.57}, flat(608, 6e7, 700)}};
    EXPECT_EQ(rank_strategies(one, s, 1.0, 38).chosen, 0u);
    std::vector<CandidatePrediction> two = {{{750, 60, 110, 636.57}, flat(608, 6e7, 640)},
                                            {{700, 70, 120, 636.57}, flat(608, 6e7, 640)},
                                            {{700, 60, 110, 636.57}, flat(608, 6e7, 640)}};
    const auto r = rank_strategies(two, s, 1.0, 38);
    EXPECT_EQ(r.chosen, 2u);
    EXPECT_EQ(r.ranked[1].index, 1u);
    EXPECT_EQ(r.grid.tau2_end.size(), 2u);
    EXPECT_TRUE(std::isnan(r.grid.total[1][1]));
    EXPECT_THROW((void)rank_strategies({}, s, 1.0, 38), NoCandidates);
}

TEST(Ranking, ScalingRewardsKeepsChoice)
{
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> pf(580, 700);
    std::uniform_real_distribution<double> pw(0.7, 1.3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CandidatePrediction> cands;
        for (int k = 0; k < 8; ++k) {
            Transient t = flat(0, 0, 0);
            for (std::size_t i = 0; i < t.size(); ++i) {
                t.column(var::pfcl_temp)[i] = pf(gen);
                t.column(var::core_power)[i] = 6e7 * pw(gen);
                t.column(var::psp2_torque)[i] = 636.57 * pw(gen);
            }
            cands.push_back({{636.57 + k, 50.0 + k, 100.0 + k, 636.57}, t});
        }
        RewardSpec s;
        RewardSpec scaled = s;
        scaled.reward_best *= 3.7;
        scaled.reward_good *= 3.7;
        scaled.reward_bad *= 3.7;
        EXPECT_EQ(rank_strategies(cands, s, 1.0, 38).chosen, rank_strategies(cands, scaled, 1.0, 38).chosen);
        const auto r = rank_strategies(cands, s, 1.0, 38);
        for (const auto& c : r.ranked) {
            EXPECT_GE(c.rewards.total, -2500.0);
            EXPECT_LE(c.rewards.total, 1250.0);
        }
    }
}

TEST(Discrepancy, DocumentedFactors)
{
    auto expected = flat(605.8, 6e7, 636.57);
    auto observed = flat(605.8, 6e7, 636.57);
    auto same = check_discrepancy(expected, observed, 38, 100);
    EXPECT_EQ(same.zeta_power, 0.0);
    EXPECT_EQ(same.verdict, Verdict::Continue);
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (observed.time[i] >= 38) {
            observed.column(var::core_power)[i] += 0.36e6;
        }
    }
    const auto r = check_discrepancy(expected, observed, 38, 100);
    EXPECT_NEAR(r.zeta_power, 0.006, 1e-12);
    EXPECT_EQ(r.verdict, Verdict::Continue);
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (observed.time[i] >= 38) {
            observed.column(var::pfcl_temp)[i] += 72.7;
        }
    }
    const auto hot = check_discrepancy(expected, observed, 38, 100);
    EXPECT_NEAR(hot.zeta_pfcl, 72.7 / 605.8, 1e-12);
    EXPECT_EQ(hot.verdict, Verdict::Scram);
    // swapping roles keeps the RMSE
    const auto swapped = check_discrepancy(observed, expected, 38, 100, 6e7, 605.8);
    EXPECT_NEAR(swapped.zeta_pfcl, hot.zeta_pfcl, 1e-15);
    EXPECT_THROW((void)check_discrepancy(expected, flat(1, 1, 1, 50), 38, 100), WindowMismatch);
}

TEST(Discrepancy, VerdictMonotone)
{
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> z(0.0, 0.2);
    for (int i = 0; i < 10000; ++i) {
        const double a = z(gen);
        const double b = z(gen);
        if (discrepancy_verdict(a, b, 0.1) == Verdict::Scram) {
            ASSERT_EQ(discrepancy_verdict(a + z(gen), b, 0.1), Verdict::Scram);
            ASSERT_EQ(discrepancy_verdict(a, b + z(gen), 0.1), Verdict::Scram);
        }
    }
}

TEST(DecisionError, HandExamples)
{
    EXPECT_EQ(decision_error({5, 5, 1}, {5, 5, 1}, 5), 0.0);
    EXPECT_NEAR(decision_error({6, 6, 2}, {1, 1, -3}, 5), 1.0, 1e-12);
    EXPECT_NEAR(decision_error({5, 5, 1}, {5, 1, 1}, 5), 0.2 * std::sqrt(16.0 / 3.0), 1e-12);
    EXPECT_THROW((void)decision_error({1}, {1}, 0.0), ZeroNormalizer);
    const auto rep = decision_error_report(flat(608, 6e7, 636.57), flat(608, 6e7, 636.57), RewardSpec{}, 1, 50);
    EXPECT_EQ(rep.eps[0], 0.0);
}
