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
#include <filesystem>

#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/plant/simulator.hpp"
#include "twinctl/strategy/inventory.hpp"

using namespace twinctl;
using namespace twinctl::strategy;

namespace {

constexpr double kTau0 = 636.57;

// Pump-1 torque measured on a 1 s grid up to t_rcmd for a ramp from t_acc.
void measured(double t_rcmd, const MalfunctionEstimate& e, std::vector<double>& t, std::vector<double>& tau)
{
    const auto truth = PiecewiseLinear::ramp(e.t_acc, kTau0, e.t1_end, e.tau1_end);
    for (double s = 0.0; s <= t_rcmd + 1e-9; s += 1.0) {
        t.push_back(s);
        tau.push_back(truth(s));
    }
}

} // namespace

TEST(Psp1Curve, HitsEstimateAndStaysContinuous)
{
    const MalfunctionEstimate e{20.0, 70.0, 494.23};
    std::vector<double> t;
    std::vector<double> tau;
    measured(37.0, e, t, tau);
    t.push_back(37.8);
    tau.push_back(PiecewiseLinear::ramp(20, kTau0, 70, 494.23)(37.8));
    const auto c = predict_psp1_curve(t, tau, e);
    EXPECT_NEAR(c(70.0), 494.23, 1e-12);
    EXPECT_NEAR(c(200.0), 494.23, 1e-12);
    EXPECT_NEAR(c(37.8), tau.back(), 1e-12);
    EXPECT_NEAR(c(0.5 * (37.8 + 70.0)), 0.5 * (tau.back() + 494.23), 1e-9);
    EXPECT_NEAR(c(10.0), kTau0, 1e-12);
}

TEST(Psp1Curve, PlateauConsistency)
{
    const MalfunctionEstimate e{20.0, 30.0, 400.0};
    std::vector<double> t;
    std::vector<double> tau;
    measured(38.0, e, t, tau);
    const auto c = predict_psp1_curve(t, tau, e);
    EXPECT_DOUBLE_EQ(c(100.0), 400.0);
    MalfunctionEstimate wrong = e;
    wrong.tau1_end = 300.0;
    EXPECT_THROW((void)predict_psp1_curve(t, tau, wrong), InvalidEstimate);
    EXPECT_THROW((void)predict_psp1_curve({}, {}, e), InvalidEstimate);
    EXPECT_THROW((MalfunctionEstimate{50, 40, 10}.validate()), InvalidEstimate);
}

TEST(Psp1Curve, RecentEndIsStillSettling)
{
    // ramp ends exactly at t_rcmd; applied torque still lags the setpoint
    const MalfunctionEstimate e{20.0, 38.0, 63.657};
    const std::vector<double> t{0.0, 20.0, 38.0};
    const std::vector<double> tau{kTau0, kTau0, 111.4};
    const auto c = predict_psp1_curve(t, tau, e);
    EXPECT_NEAR(c(38.0), 111.4, 1e-12);
    EXPECT_NEAR(c(38.0 + kSettleTime), 63.657, 1e-12);
    EXPECT_NEAR(c(150.0), 63.657, 1e-12);
}

TEST(Psp2Curve, RampValues)
{
    const CandidateStrategy c{750.30, 37.8, 87.8, kTau0};
    const auto curve = predict_psp2_curve(c);
    EXPECT_NEAR(curve(62.8), 693.435, 1e-9);
    EXPECT_EQ(curve(10.0), kTau0);
    EXPECT_EQ(curve(37.0), kTau0);
    EXPECT_NEAR(curve(87.8), 750.30, 1e-12);
    const auto flat = predict_psp2_curve({kTau0, 50, 100, kTau0});
    for (double t = 0; t <= 250; t += 0.5) {
        ASSERT_EQ(flat(t), kTau0);
    }
}

TEST(Schedule, AffineSegmentsAndContinuity)
{
    const MalfunctionEstimate e{20.0, 70.0, 494.23};
    std::vector<double> t;
    std::vector<double> tau;
    measured(38.0, e, t, tau);
    const auto s = make_schedule(predict_psp1_curve(t, tau, e), predict_psp2_curve({700, 60, 110, kTau0}), 38, 250, 1);
    ASSERT_EQ(s.time.size(), 251u);
    // second differences vanish away from breakpoints
    const std::vector<double> kinks1 = {20, 70};
    const std::vector<double> kinks2 = {60, 110};
    for (std::size_t i = 1; i + 1 < s.time.size(); ++i) {
        const double ti = s.time[i];
        auto near_kink = [&](const std::vector<double>& k) {
            return std::any_of(k.begin(), k.end(), [&](double x) { return std::abs(x - ti) < 1.0 + 1e-9; });
        };
        if (!near_kink(kinks1)) {
            EXPECT_NEAR(s.psp1_samples[i - 1] - 2 * s.psp1_samples[i] + s.psp1_samples[i + 1], 0.0, 1e-9) << ti;
        }
        if (!near_kink(kinks2)) {
            EXPECT_NEAR(s.psp2_samples[i - 1] - 2 * s.psp2_samples[i] + s.psp2_samples[i + 1], 0.0, 1e-9) << ti;
        }
    }
    for (double k : {20.0, 38.0, 70.0}) {
        EXPECT_NEAR(s.psp1(k - 1e-9), s.psp1(k + 1e-9), 1e-6);
    }
}

TEST(Enumerate, StandardGridCounts)
{
    const auto g = CandidateGrid::standard();
    EXPECT_EQ(g.size(), 300u);
    const auto psp1 = PiecewiseLinear::constant(kTau0);
    const auto all = enumerate_candidates(g, 605.8, [](const CandidateStrategy&, double) { return true; }, psp1, 38,
                                          250, 1);
    EXPECT_EQ(all.size(), 300u);
    EXPECT_EQ(all.front().strategy.tau2_end, kTau0);
    EXPECT_EQ(all.back().strategy.tau2_end, 1.5 * kTau0);
    EXPECT_EQ(all.back().strategy.t2_end, 150.0);
    EXPECT_THROW((void)enumerate_candidates(g, 605.8, [](const CandidateStrategy&, double) { return false; }, psp1, 38,
                                            250, 1),
                 NoCandidates);
    const auto again = enumerate_candidates(g, 605.8, [](const CandidateStrategy& c, double) { return c.t_trip < 70; },
                                            psp1, 38, 250, 1);
    const auto twice = enumerate_candidates(g, 605.8, [](const CandidateStrategy& c, double) { return c.t_trip < 70; },
                                            psp1, 38, 250, 1);
    ASSERT_EQ(again.size(), twice.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        EXPECT_EQ(again[i].strategy, twice[i].strategy);
    }
}

TEST(Enumerate, GridJsonAndBounds)
{
    const auto g = grid_from_json({{"tau2_end_fraction", {{"linspace", {1.0, 1.2, 3}}}}, {"t_trip", {60, 70}}});
    EXPECT_EQ(g.size(), 6u);
    EXPECT_THROW((void)grid_from_json({{"bogus", 1}}), ParseError);
    auto bad = CandidateGrid::standard();
    bad.tau2_end.push_back(2.0 * kTau0);
    EXPECT_THROW((void)bad.candidates(), InvalidSpec);
}

TEST(ReferenceTable, SubsetContainsNominalHold)
{
    const auto params = plant::PlantParams::nominal();
    auto grid = CandidateGrid::standard();
    grid.tau2_end = {grid.tau2_end.front(), grid.tau2_end[12], grid.tau2_end.back()};
    grid.t_trip = {50.0, 100.0};
    const auto table = build_reference_table(params, grid, {20, 70, 0.0}, 250);
    ASSERT_EQ(table.rows.size(), 6u);
    const auto pred = table_predicate(table);
    const auto psp1 = PiecewiseLinear::constant(kTau0);
    const auto avail = enumerate_candidates(grid, table.nominal_pfcl, pred, psp1, 38, 250, 1);
    EXPECT_LE(avail.size(), grid.size());
    EXPECT_EQ(avail.front().strategy.tau2_end, kTau0);
    // a much hotter diagnosis shrinks the set
    EXPECT_THROW((void)enumerate_candidates(grid, table.nominal_pfcl + 200, pred, psp1, 38, 250, 1), NoCandidates);

    const auto path = std::filesystem::temp_directory_path() / "twinctl_reftable.csv";
    table.write_csv(path);
    const auto back = ReferenceTable::read_csv(path, table.nominal_pfcl);
    ASSERT_EQ(back.rows.size(), table.rows.size());
    EXPECT_EQ(back.rows[3].max_reachable_pfcl, table.rows[3].max_reachable_pfcl);
    std::filesystem::remove(path);
}

TEST(ReferenceTable, MitigationHelps)
{
    const auto params = plant::PlantParams::nominal();
    CandidateGrid grid = CandidateGrid::standard();
    grid.tau2_end = {kTau0, 1.5 * kTau0};
    grid.t_trip = {50.0};
    const auto table = build_reference_table(params, grid, {20, 70, 0.0}, 250);
    EXPECT_LT(table.rows[1].max_reachable_pfcl, table.rows[0].max_reachable_pfcl);
}

TEST(Psp1Curve, TracksRealizedPlantTorque)
{
    // measured segment from the plant plus the analytic tail, against the
    // plant's own lagged torque record
    const auto params = plant::PlantParams::nominal();
    const MalfunctionEstimate e{20.0, 70.0, 494.23};
    const auto tr = plant::run_transient(params, PiecewiseLinear::ramp(20, kTau0, 70, 494.23), std::nullopt, 250, 1.0);
    const auto& tau = tr.column(var::psp1_torque);
    std::vector<double> t(tr.time.begin(), tr.time.begin() + 39);
    std::vector<double> m(tau.begin(), tau.begin() + 39);
    const auto c = predict_psp1_curve(t, m, e);
    double se = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        se += std::pow(c(tr.time[i]) - tau[i], 2);
    }
    EXPECT_LT(std::sqrt(se / static_cast<double>(tr.size())), 0.05 * kTau0);
}
