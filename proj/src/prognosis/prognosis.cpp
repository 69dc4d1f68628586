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

#include "twinctl/prognosis/prognosis.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include "twinctl/common/error.hpp"
#include "twinctl/common/features.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::dtp {

namespace {

constexpr const char* kSchema = "twinctl.dtp.v1";
constexpr double kTimeSlack = 1e-9;

std::vector<std::string> names_of(std::initializer_list<std::string_view> v)
{
    return {v.begin(), v.end()};
}

Eigen::MatrixXd deltas(const Eigen::MatrixXd& x)
{
    return x.rightCols(x.cols() - 1) - x.leftCols(x.cols() - 1);
}

void check_shape(const Transient& tr)
{
    if (tr.size() < 2) {
        throw TooFew("transient '" + tr.scenario_id + "' has fewer than two samples");
    }
}

nn::SequenceDataset build_set(const std::vector<Transient>& set, const PrognosisModel& m)
{
    nn::SequenceDataset d;
    for (const auto& tr : set) {
        check_shape(tr);
        const Eigen::MatrixXd x = feature_matrix(tr, m.config.states);
        const Eigen::MatrixXd a = feature_matrix(tr, m.config.actions);
        const Eigen::Index T = x.cols() - 1;
        Eigen::MatrixXd in(x.rows() + a.rows(), T);
        in.topRows(x.rows()) = m.state_norm.normalize(x.leftCols(T));
        in.bottomRows(a.rows()) = m.action_norm.normalize(a.leftCols(T));
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(T);
        mask.head(std::min<Eigen::Index>(m.config.burn_in, T)).setZero();
        d.inputs.push_back(std::move(in));
        d.targets.push_back(m.config.residual ? m.delta_norm.normalize(deltas(x))
                                              : m.state_norm.normalize(x.rightCols(T)));
        d.masks.push_back(std::move(mask));
    }
    return d;
}

Eigen::VectorXd net_step(const PrognosisModel& m, const Eigen::VectorXd& x, double a1, double a2, nn::GruState& s)
{
    Eigen::VectorXd in(x.size() + 2);
    in.head(x.size()) = m.state_norm.normalize(x);
    Eigen::Vector2d a(a1, a2);
    in.tail(2) = m.action_norm.normalize(a);
    const Eigen::MatrixXd y = m.net.step(in, s);
    if (m.config.residual) {
        return x + m.delta_norm.inverse(y).col(0);
    }
    return m.state_norm.inverse(y).col(0);
}

ErrorReport finish(const std::vector<std::string>& names, const Eigen::VectorXd& sse, std::size_t points)
{
    if (points == 0) {
        throw EmptyInput("nothing to score");
    }
    ErrorReport r;
    r.names = names;
    r.points = points;
    for (Eigen::Index i = 0; i < sse.size(); ++i) {
        r.mse.push_back(sse(i) / static_cast<double>(points));
        r.rmse.push_back(std::sqrt(r.mse.back()));
    }
    return r;
}

void check_cover(const strategy::TorqueSchedule& s, double t0, double t1)
{
    if (s.psp1.empty() || s.psp2.empty() || t0 < -kTimeSlack || t1 > s.horizon + kTimeSlack) {
        throw ScheduleGap("schedule covers [0, " + std::to_string(s.horizon) + "] s but [" + std::to_string(t0) +
                          ", " + std::to_string(t1) + "] s is needed");
    }
}

Transient first_row(const PrognosisModel& m, const HistoryBuffer& h)
{
    Transient t;
    t.time.push_back(h.t_r());
    for (std::size_t i = 0; i < m.config.states.size(); ++i) {
        t.add_column(m.config.states[i], {h.states(static_cast<Eigen::Index>(i), h.states.cols() - 1)});
    }
    for (std::size_t i = 0; i < m.config.actions.size(); ++i) {
        t.add_column(m.config.actions[i], {h.actions(static_cast<Eigen::Index>(i), h.actions.cols() - 1)});
    }
    return t;
}

void append(Transient& dst, const Transient& src)
{
    dst.time.insert(dst.time.end(), src.time.begin(), src.time.end());
    for (std::size_t c = 0; c < dst.columns.size(); ++c) {
        const auto& from = src.column(dst.names[c]);
        dst.columns[c].insert(dst.columns[c].end(), from.begin(), from.end());
    }
}

long steps_for(double horizon, double cadence)
{
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
        throw InvalidSpec("prediction horizon must be non-negative");
    }
    const double n = horizon / cadence;
    const long steps = std::lround(n);
    if (std::abs(n - static_cast<double>(steps)) > 1e-6) {
        throw InvalidSpec("horizon must be a whole number of history cadences");
    }
    return steps;
}

template <bool Parallel>
std::vector<Transient> predict_impl(const PrognosisModel& model, const HistoryBuffer& history,
                                    std::span<const strategy::TorqueSchedule> schedules, double horizon)
{
    history.validate();
    const long steps = steps_for(horizon, history.cadence());
    for (const auto& s : schedules) {
        check_cover(s, history.t_r(), history.t_r() + horizon);
    }
    const Rollout warm = model.warm_up(history);
    const Transient head = first_row(model, history);
    std::vector<Transient> out(schedules.size());
    const auto n = static_cast<long>(schedules.size());
    std::optional<std::string> failure;
#pragma omp parallel for schedule(dynamic) if (Parallel)
    for (long k = 0; k < n; ++k) {
        try {
            Rollout r = warm;
            Transient t = head;
            append(t, model.advance(r, schedules[static_cast<std::size_t>(k)], steps));
            out[static_cast<std::size_t>(k)] = std::move(t);
        }
        catch (const std::exception& e) {
#pragma omp critical(twinctl_dtp_failure)
            if (!failure) {
                failure = e.what();
            }
        }
    }
    if (failure) {
        throw NumericalBlowup("multistep prediction failed: " + *failure);
    }
    return out;
}

} // namespace

PrognosisConfig::PrognosisConfig()
    : states(names_of({var::pfcl_temp, var::core_power, var::core_flow, var::ihx_power, var::peak_clad_temp})),
      actions(names_of({var::psp1_torque, var::psp2_torque}))
{
    train.sequence_length = 14;
    train.batch_size = 512;
    train.learning_rate = 0.001;
    train.hidden = 30;
    train.layers = 2;
    train.l2 = 0.0;
    train.validation_patience = 40;
    train.early_stop_patience = 80;
    train.epochs_max = 150;
}

void PrognosisConfig::validate() const
{
    check_disjoint(states, actions);
    if (actions.size() != 2) {
        throw InvalidSpec("prognosis takes exactly two action channels (pump 1 and pump 2 torque)");
    }
    train.validate();
    if (burn_in < 0) {
        throw InvalidSpec("burn_in must be non-negative");
    }
    if (!(warmup_history >= 0.0) || !(eval_t_r >= 0.0)) {
        throw InvalidSpec("history length and evaluation time must be non-negative");
    }
    const double total = split[0] + split[1] + split[2];
    if (!(split[0] > 0.0 && split[1] > 0.0 && split[2] > 0.0) || std::abs(total - 1.0) > 1e-9) {
        throw InvalidSpec("split fractions must be positive and sum to 1");
    }
}

nlohmann::json to_json(const PrognosisConfig& c)
{
    return {{"states", c.states},
            {"actions", c.actions},
            {"train", nn::to_json(c.train)},
            {"burn_in", c.burn_in},
            {"residual", c.residual},
            {"warmup_history", c.warmup_history},
            {"eval_t_r", c.eval_t_r},
            {"split", {c.split[0], c.split[1], c.split[2]}},
            {"split_seed", c.split_seed}};
}

PrognosisConfig prognosis_config_from_json(const nlohmann::json& j, PrognosisConfig c)
{
    if (!j.is_object()) {
        throw ParseError("prognosis config must be a JSON object");
    }
    const nlohmann::json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown prognosis key '" + key + "'");
        }
    }
    if (j.contains("states")) {
        c.states = j.at("states").get<std::vector<std::string>>();
    }
    if (j.contains("actions")) {
        c.actions = j.at("actions").get<std::vector<std::string>>();
    }
    if (j.contains("train")) {
        c.train = nn::train_config_from_json(j.at("train"), c.train);
    }
    c.burn_in = j.value("burn_in", c.burn_in);
    c.residual = j.value("residual", c.residual);
    c.warmup_history = j.value("warmup_history", c.warmup_history);
    c.eval_t_r = j.value("eval_t_r", c.eval_t_r);
    if (j.contains("split")) {
        const auto f = j.at("split").get<std::vector<double>>();
        if (f.size() != 3) {
            throw ParseError("split needs three fractions");
        }
        c.split = {f[0], f[1], f[2]};
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    c.validate();
    return c;
}

void HistoryBuffer::validate() const
{
    if (time.empty()) {
        throw InvalidSpec("history buffer is empty");
    }
    const auto n = static_cast<Eigen::Index>(time.size());
    if (states.cols() != n || actions.cols() != n) {
        throw DimensionMismatch("history columns do not match its time axis");
    }
    if (time.size() > 1) {
        const double dt = time[1] - time[0];
        for (std::size_t i = 1; i < time.size(); ++i) {
            const double d = time[i] - time[i - 1];
            if (!(d > 0.0) || std::abs(d - dt) > 1e-6 * dt) {
                throw InvalidSpec("history must have strictly increasing, uniform time");
            }
        }
    }
}

double HistoryBuffer::cadence() const
{
    return time.size() > 1 ? time[1] - time[0] : 1.0;
}

HistoryBuffer HistoryBuffer::from_transient(const Transient& tr, const std::vector<std::string>& states,
                                            const std::vector<std::string>& actions, double t_r, double length)
{
    if (!(length >= 0.0)) {
        throw InvalidSpec("history length must be non-negative");
    }
    const Transient s = tr.slice(t_r - length, t_r);
    if (s.size() == 0 || std::abs(s.time.back() - t_r) > 1e-6) {
        throw InvalidSpec("transient has no record at t_r = " + std::to_string(t_r));
    }
    HistoryBuffer h{s.time, feature_matrix(s, states), feature_matrix(s, actions)};
    h.validate();
    return h;
}

Rollout PrognosisModel::warm_up(const HistoryBuffer& history) const
{
    history.validate();
    if (history.states.rows() != state_norm.size() || history.actions.rows() != action_norm.size()) {
        throw DimensionMismatch("history does not carry the model's state and action channels");
    }
    Rollout r;
    r.state = net.zero_state(1);
    r.t_r = history.t_r();
    r.cadence = history.cadence();
    r.step = 1;
    for (Eigen::Index k = 0; k < history.states.cols(); ++k) {
        r.next = net_step(*this, history.states.col(k), history.actions(0, k), history.actions(1, k), r.state);
    }
    return r;
}

Transient PrognosisModel::advance(Rollout& rollout, const strategy::TorqueSchedule& schedule, long steps) const
{
    if (steps < 0) {
        throw InvalidSpec("step count must be non-negative");
    }
    const double t_last = rollout.t_r + static_cast<double>(rollout.step + steps - 1) * rollout.cadence;
    check_cover(schedule, rollout.time_next(), steps > 0 ? t_last : rollout.time_next());
    const std::size_t ns = config.states.size();
    std::vector<std::vector<double>> cols(ns + 2);
    Transient out;
    for (long i = 0; i < steps; ++i) {
        const double t = rollout.time_next();
        const double a1 = schedule.psp1(t);
        const double a2 = schedule.psp2(t);
        out.time.push_back(t);
        for (std::size_t c = 0; c < ns; ++c) {
            cols[c].push_back(rollout.next(static_cast<Eigen::Index>(c)));
        }
        cols[ns].push_back(a1);
        cols[ns + 1].push_back(a2);
        rollout.next = net_step(*this, rollout.next, a1, a2, rollout.state);
        if (!rollout.next.allFinite()) {
            throw NumericalBlowup("prediction became non-finite at t = " + std::to_string(t));
        }
        ++rollout.step;
    }
    for (std::size_t c = 0; c < ns; ++c) {
        out.add_column(config.states[c], std::move(cols[c]));
    }
    out.add_column(config.actions[0], std::move(cols[ns]));
    out.add_column(config.actions[1], std::move(cols[ns + 1]));
    return out;
}

nlohmann::json PrognosisModel::to_json() const
{
    const nlohmann::json ev = {{"one_step_train", evaluation.one_step_train.to_json()},
                               {"one_step_validation", evaluation.one_step_validation.to_json()},
                               {"one_step_test", evaluation.one_step_test.to_json()},
                               {"closed_loop_test", evaluation.closed_loop_test.to_json()},
                               {"best_epoch", evaluation.best_epoch},
                               {"epochs_run", evaluation.epochs_run},
                               {"stop_reason", evaluation.stop_reason}};
    return {{"schema", kSchema},
            {"config", dtp::to_json(config)},
            {"database_fingerprint", database_fingerprint},
            {"state_norm", state_norm.to_json()},
            {"action_norm", action_norm.to_json()},
            {"delta_norm", config.residual ? delta_norm.to_json() : nlohmann::json(nullptr)},
            {"net", net.to_json()},
            {"evaluation", ev}};
}

PrognosisModel PrognosisModel::from_json(const nlohmann::json& j)
{
    try {
        if (j.value("schema", "") != kSchema) {
            throw ModelLoadError("not a prognosis model file");
        }
        PrognosisModel m;
        m.config = prognosis_config_from_json(j.at("config"));
        m.database_fingerprint = j.at("database_fingerprint").get<std::string>();
        m.state_norm = nn::Normalizer::from_json(j.at("state_norm"));
        m.action_norm = nn::Normalizer::from_json(j.at("action_norm"));
        if (m.config.residual) {
            m.delta_norm = nn::Normalizer::from_json(j.at("delta_norm"));
        }
        m.net = nn::RecurrentNet::from_json(j.at("net"));
        const auto ns = static_cast<int>(m.config.states.size());
        if (m.net.inputs() != ns + 2 || m.net.outputs() != ns || m.state_norm.size() != ns ||
            (m.config.residual && m.delta_norm.size() != ns) || m.action_norm.size() != 2) {
            throw ModelLoadError("net or normalizer shape does not match the feature lists");
        }
        const auto& ev = j.at("evaluation");
        m.evaluation.one_step_train = ErrorReport::from_json(ev.at("one_step_train"));
        m.evaluation.one_step_validation = ErrorReport::from_json(ev.at("one_step_validation"));
        m.evaluation.one_step_test = ErrorReport::from_json(ev.at("one_step_test"));
        m.evaluation.closed_loop_test = ErrorReport::from_json(ev.at("closed_loop_test"));
        m.evaluation.best_epoch = ev.at("best_epoch").get<int>();
        m.evaluation.epochs_run = ev.at("epochs_run").get<int>();
        m.evaluation.stop_reason = ev.at("stop_reason").get<std::string>();
        return m;
    }
    catch (const ModelLoadError&) {
        throw;
    }
    catch (const std::exception& e) {
        throw ModelLoadError(std::string("bad prognosis model: ") + e.what());
    }
}

void PrognosisModel::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << to_json().dump(1) << '\n';
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

PrognosisModel PrognosisModel::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    }
    catch (const std::exception& e) {
        throw ModelLoadError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

PrognosisModel train_dtp(const scenario::Split& split, const PrognosisConfig& config,
                         const std::string& database_fingerprint)
{
    config.validate();
    PrognosisModel m;
    m.config = config;
    m.database_fingerprint = database_fingerprint;
    m.state_norm = nn::Normalizer::fit(pooled_features(split.train, config.states), config.states);
    m.action_norm = nn::Normalizer::fit(pooled_features(split.train, config.actions), config.actions);
    if (config.residual) {
        Eigen::Index total = 0;
        for (const auto& tr : split.train) {
            check_shape(tr);
            total += static_cast<Eigen::Index>(tr.size()) - 1;
        }
        Eigen::MatrixXd d(static_cast<Eigen::Index>(config.states.size()), total);
        Eigen::Index at = 0;
        for (const auto& tr : split.train) {
            const Eigen::MatrixXd dx = deltas(feature_matrix(tr, config.states));
            d.middleCols(at, dx.cols()) = dx;
            at += dx.cols();
        }
        m.delta_norm = nn::Normalizer::fit(d, config.states);
    }

    const int ns = static_cast<int>(config.states.size());
    m.net = nn::RecurrentNet(ns + 2, config.train.hidden, config.train.layers, ns, config.train.seed);
    const nn::TrainResult r =
        nn::train(m.net, build_set(split.train, m), build_set(split.validation, m), build_set(split.test, m),
                  config.train);
    m.evaluation.best_epoch = r.best_epoch;
    m.evaluation.epochs_run = static_cast<int>(r.history.size());
    m.evaluation.stop_reason = r.stop_reason;
    m.evaluation.one_step_train = evaluate_one_step(m, split.train);
    m.evaluation.one_step_validation = evaluate_one_step(m, split.validation);
    m.evaluation.one_step_test = evaluate_one_step(m, split.test);
    m.evaluation.closed_loop_test = evaluate_closed_loop(m, split.test, config.eval_t_r, config.warmup_history);
    return m;
}

PrognosisModel train_dtp(const scenario::Database& db, const PrognosisConfig& config)
{
    config.validate();
    const auto split = scenario::split_database(db.transients, config.split, config.split_seed);
    return train_dtp(split, config, db.fingerprint());
}

std::vector<Transient> predict_multistep(const PrognosisModel& model, const HistoryBuffer& history,
                                         std::span<const strategy::TorqueSchedule> schedules, double horizon)
{
    return predict_impl<true>(model, history, schedules, horizon);
}

std::vector<Transient> predict_multistep_serial(const PrognosisModel& model, const HistoryBuffer& history,
                                                std::span<const strategy::TorqueSchedule> schedules,
                                                double horizon)
{
    return predict_impl<false>(model, history, schedules, horizon);
}

strategy::TorqueSchedule recorded_schedule(const Transient& tr)
{
    check_shape(tr);
    std::vector<Breakpoint> p1;
    std::vector<Breakpoint> p2;
    const auto& a1 = tr.column(var::psp1_torque);
    const auto& a2 = tr.column(var::psp2_torque);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        p1.push_back({tr.time[i], a1[i]});
        p2.push_back({tr.time[i], a2[i]});
    }
    return strategy::make_schedule(PiecewiseLinear(std::move(p1)), PiecewiseLinear(std::move(p2)), tr.time.front(),
                                   tr.time.back(), tr.cadence());
}

ErrorReport evaluate_one_step(const PrognosisModel& model, const std::vector<Transient>& transients)
{
    const auto ns = static_cast<Eigen::Index>(model.config.states.size());
    Eigen::VectorXd sse = Eigen::VectorXd::Zero(ns);
    std::size_t points = 0;
    for (const auto& tr : transients) {
        check_shape(tr);
        const Eigen::MatrixXd x = feature_matrix(tr, model.config.states);
        const Eigen::MatrixXd a = feature_matrix(tr, model.config.actions);
        nn::GruState s = model.net.zero_state(1);
        for (Eigen::Index k = 0; k + 1 < x.cols(); ++k) {
            const Eigen::VectorXd pred = net_step(model, x.col(k), a(0, k), a(1, k), s);
            if (k >= model.config.burn_in) {
                sse += (pred - x.col(k + 1)).array().square().matrix();
                ++points;
            }
        }
    }
    return finish(model.config.states, sse, points);
}

ErrorReport evaluate_closed_loop(const PrognosisModel& model, const std::vector<Transient>& transients, double t_r,
                                 double history)
{
    const auto ns = static_cast<Eigen::Index>(model.config.states.size());
    Eigen::VectorXd sse = Eigen::VectorXd::Zero(ns);
    std::size_t points = 0;
    for (const auto& tr : transients) {
        const HistoryBuffer h = HistoryBuffer::from_transient(tr, model.config.states, model.config.actions, t_r,
                                                              history);
        const Transient future = tr.slice(t_r + 0.5 * tr.cadence(), tr.time.back());
        if (future.size() == 0) {
            continue;
        }
        Rollout r = model.warm_up(h);
        const Transient pred = model.advance(r, recorded_schedule(tr), static_cast<long>(future.size()));
        const Eigen::MatrixXd truth = feature_matrix(future, model.config.states);
        const Eigen::MatrixXd est = feature_matrix(pred, model.config.states);
        sse += (est - truth).array().square().rowwise().sum().matrix();
        points += future.size();
    }
    return finish(model.config.states, sse, points);
}

std::vector<HistoryPoint> history_sensitivity(const PrognosisModel& model, const std::vector<Transient>& transients,
                                              const std::vector<double>& lengths, double t_r)
{
    std::vector<HistoryPoint> out;
    for (const double len : lengths) {
        if (!(len >= 0.0) || len > t_r + kTimeSlack) {
            throw InvalidSpec("history lengths must lie in [0, t_r]");
        }
        out.push_back({len, evaluate_closed_loop(model, transients, t_r, len)});
    }
    return out;
}

} // namespace twinctl::dtp
