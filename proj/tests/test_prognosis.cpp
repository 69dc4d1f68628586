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

#include "small_db.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/plant/simulator.hpp"
#include "twinctl/prognosis/prognosis.hpp"

using namespace twinctl;
using namespace twinctl::dtp;

namespace {

constexpr double kTau0 = 636.57;

PrognosisConfig quick_config()
{
    PrognosisConfig c;
    c.train.hidden = 12;
    c.train.epochs_max = 15;
    c.train.batch_size = 16;
    c.train.seed = 4;
    // a 15-epoch direct net holds the nominal point over 250 free-running
    // steps; the residual default is exercised by the orchestrator fixtures
    c.residual = false;
    return c;
}

strategy::TorqueSchedule schedule(double tau2, double t_trip)
{
    return strategy::make_schedule(PiecewiseLinear::ramp(20.0, kTau0, 70.0, 0.6 * kTau0),
                                   PiecewiseLinear::ramp(t_trip, kTau0, t_trip + 50.0, tau2), 38.0, 250.0, 1.0);
}

class TrainedDtp : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        db_ = new scenario::Database(fixture::small_db(40, 6));
        split_ = new scenario::Split(scenario::split_database(db_->transients, {0.8, 0.1, 0.1}, 7));
        model_ = new PrognosisModel(train_dtp(*split_, quick_config(), db_->fingerprint()));
    }
    static void TearDownTestSuite()
    {
        delete model_;
        delete split_;
        delete db_;
    }
    static HistoryBuffer history(double len = 20.0)
    {
        return HistoryBuffer::from_transient(split_->test.front(), model_->config.states, model_->config.actions,
                                             38.0, len);
    }
    static scenario::Database* db_;
    static scenario::Split* split_;
    static PrognosisModel* model_;
};

scenario::Database* TrainedDtp::db_ = nullptr;
scenario::Split* TrainedDtp::split_ = nullptr;
PrognosisModel* TrainedDtp::model_ = nullptr;

} // namespace

TEST(PrognosisConfig, DefaultsAndJson)
{
    const PrognosisConfig c;
    EXPECT_EQ(c.train.sequence_length, 14);
    EXPECT_EQ(c.train.batch_size, 512);
    EXPECT_EQ(c.states.size(), 5u);
    EXPECT_EQ(c.actions.size(), 2u);
    EXPECT_EQ(to_json(prognosis_config_from_json(to_json(c))), to_json(c));
    EXPECT_THROW((void)prognosis_config_from_json({{"nope", 0}}), ParseError);
    PrognosisConfig bad;
    bad.actions.push_back(bad.states.front());
    EXPECT_THROW(bad.validate(), InvalidSpec);
}

TEST(HistoryBuffer, Validation)
{
    const auto db = fixture::small_db(1, 3);
    const PrognosisConfig c;
    const auto h0 = HistoryBuffer::from_transient(db.transients.front(), c.states, c.actions, 38.0, 0.0);
    EXPECT_EQ(h0.time.size(), 1u);
    EXPECT_DOUBLE_EQ(h0.t_r(), 38.0);
    EXPECT_EQ(HistoryBuffer::from_transient(db.transients.front(), c.states, c.actions, 38.0, 5.0).time.size(), 6u);
    HistoryBuffer gap = HistoryBuffer::from_transient(db.transients.front(), c.states, c.actions, 38.0, 3.0);
    gap.time[2] += 0.5;
    EXPECT_THROW(gap.validate(), InvalidSpec);
    EXPECT_THROW((void)HistoryBuffer::from_transient(db.transients.front(), c.states, c.actions, 38.5, 3.0),
                 InvalidSpec);
}

TEST(PrognosisTrain, MissingTorqueColumns)
{
    auto db = fixture::small_db(10, 3);
    for (auto& t : db.transients) {
        const auto i = t.index_of(var::psp2_torque);
        t.names.erase(t.names.begin() + static_cast<long>(i));
        t.columns.erase(t.columns.begin() + static_cast<long>(i));
    }
    EXPECT_THROW((void)train_dtp(db, quick_config()), MissingFeature);
}

TEST(PrognosisTrain, Deterministic)
{
    const auto db = fixture::small_db(10, 8);
    auto c = quick_config();
    c.train.epochs_max = 2;
    c.residual = true;
    EXPECT_EQ(train_dtp(db, c).to_json(), train_dtp(db, c).to_json());
    c.residual = false;
    const auto direct = train_dtp(db, c);
    EXPECT_EQ(direct.to_json().at("delta_norm"), nullptr);
    EXPECT_EQ(PrognosisModel::from_json(direct.to_json()).to_json(), direct.to_json());
}

TEST_F(TrainedDtp, ScheduleGap)
{
    auto s = schedule(kTau0, 60.0);
    s.horizon = 100.0;
    const std::vector<strategy::TorqueSchedule> one{s};
    EXPECT_THROW((void)predict_multistep(*model_, history(), one, 212.0), ScheduleGap);
    EXPECT_NO_THROW((void)predict_multistep(*model_, history(), one, 62.0));
}

TEST_F(TrainedDtp, SharedWarmStateIsBatchIndependent)
{
    const auto a = schedule(1.2 * kTau0, 60.0);
    const auto b = schedule(1.4 * kTau0, 80.0);
    const auto c = schedule(1.0 * kTau0, 50.0);
    const std::vector<strategy::TorqueSchedule> alone{a};
    const std::vector<strategy::TorqueSchedule> mixed{b, a, c, a};
    const auto r1 = predict_multistep(*model_, history(), alone, 212.0);
    const auto r2 = predict_multistep(*model_, history(), mixed, 212.0);
    ASSERT_EQ(r2.size(), 4u);
    EXPECT_EQ(r1[0].columns, r2[1].columns);
    EXPECT_EQ(r2[1].columns, r2[3].columns);
    EXPECT_EQ(r1[0].time.front(), 38.0);
    EXPECT_EQ(r1[0].time.back(), 250.0);
    EXPECT_NE(r2[0].columns, r2[1].columns);
    const auto serial = predict_multistep_serial(*model_, history(), mixed, 212.0);
    for (std::size_t k = 0; k < serial.size(); ++k) {
        EXPECT_EQ(serial[k].columns, r2[k].columns);
    }
}

TEST_F(TrainedDtp, RecursionIdentity)
{
    const auto s = schedule(1.3 * kTau0, 70.0);
    Rollout whole = model_->warm_up(history());
    const auto full = model_->advance(whole, s, 200);
    Rollout split = model_->warm_up(history());
    auto first = model_->advance(split, s, 100);
    const auto second = model_->advance(split, s, 100);
    for (std::size_t c = 0; c < full.columns.size(); ++c) {
        for (std::size_t i = 0; i < 200; ++i) {
            const double v = i < 100 ? first.columns[c][i] : second.columns[c][i - 100];
            EXPECT_NEAR(v, full.columns[c][i], 1e-10);
        }
    }
    EXPECT_DOUBLE_EQ(second.time.back(), full.time.back());
}

TEST_F(TrainedDtp, NominalHoldStaysNominal)
{
    const auto p = plant::PlantParams::nominal();
    const Transient steady = plant::run_transient(p, PiecewiseLinear::constant(kTau0), std::nullopt, 40.0, 1.0);
    const auto h = HistoryBuffer::from_transient(steady, model_->config.states, model_->config.actions, 20.0, 20.0);
    const auto hold = strategy::make_schedule(PiecewiseLinear::constant(kTau0), PiecewiseLinear::constant(kTau0), 20.0,
                                              270.0, 1.0);
    const std::vector<strategy::TorqueSchedule> one{hold};
    const auto pred = predict_multistep(*model_, h, one, 250.0).front();
    for (const auto& name : model_->config.states) {
        const double nominal = steady.column(name).back();
        for (const double v : pred.column(name)) {
            ASSERT_NEAR(v, nominal, 0.02 * std::abs(nominal)) << name;
        }
    }
}

TEST_F(TrainedDtp, EvaluationRecordAndReload)
{
    EXPECT_EQ(evaluate_one_step(*model_, split_->train).rmse, model_->evaluation.one_step_train.rmse);
    EXPECT_EQ(evaluate_closed_loop(*model_, split_->test, 38.0, 20.0).rmse, model_->evaluation.closed_loop_test.rmse);
    const auto path = std::filesystem::temp_directory_path() / "twinctl_dtp_roundtrip.json";
    model_->save(path);
    const auto back = PrognosisModel::load(path);
    std::filesystem::remove(path);
    const std::vector<strategy::TorqueSchedule> one{schedule(kTau0, 60.0)};
    EXPECT_EQ(predict_multistep(back, history(), one, 100.0).front().columns,
              predict_multistep(*model_, history(), one, 100.0).front().columns);
}

TEST_F(TrainedDtp, HistorySensitivityShape)
{
    const auto pts = history_sensitivity(*model_, split_->test, {0.0, 5.0, 20.0}, 38.0);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[1].length, 5.0);
    for (const auto& p : pts) {
        EXPECT_TRUE(std::isfinite(p.report.mse_of(std::string(var::pfcl_temp))));
    }
    EXPECT_THROW((void)history_sensitivity(*model_, split_->test, {50.0}, 38.0), InvalidSpec);
}
