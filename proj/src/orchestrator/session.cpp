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

#include "twinctl/orchestrator/session.hpp"

#include <cmath>
#include <set>

#include "twinctl/common/error.hpp"
#include "twinctl/common/seed.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::orch {

namespace {

constexpr double kTimeEps = 1e-9;

nlohmann::json strategy_json(const strategy::CandidateStrategy& c)
{
    return {{"tau2_end", c.tau2_end}, {"t_trip", c.t_trip}, {"t2_end", c.t2_end}, {"tau0", c.tau0}};
}

nlohmann::json transient_json(const Transient& tr)
{
    nlohmann::json cols = nlohmann::json::object();
    for (std::size_t c = 0; c < tr.names.size(); ++c) {
        cols[tr.names[c]] = tr.columns[c];
    }
    return {{"time", tr.time}, {"columns", cols}};
}

Mode mode_from_string(const std::string& s)
{
    if (s == "auto") return Mode::AutoAccept;
    if (s == "interactive") return Mode::Interactive;
    throw ParseError("mode must be 'auto' or 'interactive', got '" + s + "'");
}

void append_row(Transient& t, double time, const std::vector<double>& row)
{
    t.time.push_back(time);
    for (std::size_t c = 0; c < row.size(); ++c) {
        t.columns[c].push_back(row[c]);
    }
}

} // namespace

const char* to_string(Phase p)
{
    switch (p) {
    case Phase::Monitoring: return "monitoring";
    case Phase::PausedForRecommendation: return "paused_for_recommendation";
    case Phase::AwaitingDecision: return "awaiting_decision";
    case Phase::Executing: return "executing";
    case Phase::Checking: return "checking";
    case Phase::Completed: return "completed";
    case Phase::Scrammed: return "scrammed";
    }
    return "unknown";
}

bool is_terminal(Phase p) { return p == Phase::Completed || p == Phase::Scrammed; }

MalfunctionScenario MalfunctionScenario::from_speed(double magnitude, double speed, double start)
{
    if (!(speed > 0.0)) {
        throw InvalidSpec("malfunction speed must be positive");
    }
    return {magnitude, start, start + magnitude / speed};
}

void MalfunctionScenario::validate() const
{
    if (!(magnitude >= 0.0 && magnitude <= 100.0)) throw InvalidSpec("malfunction magnitude must be in [0, 100]");
    if (!(start >= 0.0) || !(end > start)) throw InvalidSpec("malfunction needs 0 <= start < end");
}

void SessionConfig::validate() const
{
    malfunction.validate();
    if (estimate) estimate->validate();
    if (!(cadence > 0.0)) throw InvalidSpec("cadence must be positive");
    if (!(t_rcmd > 0.0) || !(horizon > t_rcmd)) throw InvalidSpec("need 0 < t_rcmd < horizon");
    double prev = t_rcmd;
    for (double t : t_ck) {
        if (!(t > prev) || t > horizon) throw InvalidSpec("check times must increase within (t_rcmd, horizon]");
        prev = t;
    }
    if (!(sensor_noise >= 0.0)) throw InvalidSpec("sensor_noise must be >= 0");
    if (history > t_rcmd) throw InvalidSpec("history cannot reach before t = 0");
    reward.validate();
}

strategy::MalfunctionEstimate SessionConfig::effective_estimate() const
{
    if (estimate) return *estimate;
    return {malfunction.start, malfunction.end, plant.nominal_torque * (1.0 - malfunction.magnitude / 100.0)};
}

nlohmann::json to_json(const SessionConfig& c)
{
    nlohmann::json j;
    j["plant"] = plant::to_json(c.plant);
    j["malfunction"] = {{"magnitude", c.malfunction.magnitude}, {"start", c.malfunction.start},
                        {"end", c.malfunction.end}};
    if (c.estimate) {
        j["estimate"] = {{"t_acc", c.estimate->t_acc}, {"t1_end", c.estimate->t1_end},
                         {"tau1_end", c.estimate->tau1_end}};
    } else {
        j["estimate"] = nullptr;
    }
    j["t_rcmd"] = c.t_rcmd;
    j["t_ck"] = c.t_ck;
    j["horizon"] = c.horizon;
    j["cadence"] = c.cadence;
    j["dtd_model"] = c.dtd_model;
    j["dtp_model"] = c.dtp_model;
    j["reference_table"] = c.reference_table;
    j["grid"] = strategy::to_json(c.grid);
    j["reward"] = decision::to_json(c.reward);
    j["availability_limit"] = c.availability_limit;
    j["sensor_noise"] = c.sensor_noise;
    j["seed"] = c.seed;
    j["history"] = c.history;
    j["mode"] = c.mode == Mode::AutoAccept ? "auto" : "interactive";
    return j;
}

SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig c)
{
    if (!j.is_object()) throw ParseError("session config must be an object");
    static const std::set<std::string> known{"plant",  "malfunction", "estimate",  "t_rcmd",          "t_ck",
                                             "horizon", "cadence",     "dtd_model", "dtp_model",       "reference_table",
                                             "grid",   "reward",      "availability_limit", "sensor_noise", "seed",
                                             "history", "mode",       "description"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) throw ParseError("unknown session key '" + k + "'");
    }
    try {
        if (j.contains("plant")) c.plant = plant::params_from_json(j["plant"]);
        if (j.contains("malfunction")) {
            const auto& m = j["malfunction"];
            for (const auto& [k, v] : m.items()) {
                if (k != "magnitude" && k != "start" && k != "end" && k != "speed") {
                    throw ParseError("unknown malfunction key '" + k + "'");
                }
            }
            c.malfunction.magnitude = m.value("magnitude", c.malfunction.magnitude);
            c.malfunction.start = m.value("start", c.malfunction.start);
            if (m.contains("speed")) {
                if (m.contains("end")) throw ParseError("give either malfunction end or speed, not both");
                c.malfunction = MalfunctionScenario::from_speed(c.malfunction.magnitude, m["speed"].get<double>(),
                                                                c.malfunction.start);
            } else {
                c.malfunction.end = m.value("end", c.malfunction.end);
            }
        }
        if (j.contains("estimate")) {
            if (j["estimate"].is_null()) {
                c.estimate.reset();
            } else {
                strategy::MalfunctionEstimate e;
                e.t_acc = j["estimate"].at("t_acc").get<double>();
                e.t1_end = j["estimate"].at("t1_end").get<double>();
                e.tau1_end = j["estimate"].at("tau1_end").get<double>();
                c.estimate = e;
            }
        }
        c.t_rcmd = j.value("t_rcmd", c.t_rcmd);
        if (j.contains("t_ck")) c.t_ck = j["t_ck"].get<std::vector<double>>();
        c.horizon = j.value("horizon", c.horizon);
        c.cadence = j.value("cadence", c.cadence);
        c.dtd_model = j.value("dtd_model", c.dtd_model);
        c.dtp_model = j.value("dtp_model", c.dtp_model);
        c.reference_table = j.value("reference_table", c.reference_table);
        if (j.contains("grid")) c.grid = strategy::grid_from_json(j["grid"], c.plant.nominal_torque);
        if (j.contains("reward")) c.reward = decision::reward_spec_from_json(j["reward"], c.reward);
        c.availability_limit = j.value("availability_limit", c.availability_limit);
        c.sensor_noise = j.value("sensor_noise", c.sensor_noise);
        c.seed = j.value("seed", c.seed);
        c.history = j.value("history", c.history);
        if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("session config: ") + e.what());
    }
    c.validate();
    return c;
}

Assets Assets::load(const SessionConfig& c)
{
    Assets a;
    if (c.dtd_model.empty() || c.dtp_model.empty()) {
        throw InvalidSpec("session config needs dtd_model and dtp_model paths");
    }
    a.dtd = std::make_shared<const dtd::DiagnosisModel>(dtd::DiagnosisModel::load(c.dtd_model));
    a.dtp = std::make_shared<const dtp::PrognosisModel>(dtp::PrognosisModel::load(c.dtp_model));
    const double nominal_pfcl = plant::steady_state_init(c.plant).fuel_temp;
    if (!c.reference_table.empty()) {
        a.table = std::make_shared<const strategy::ReferenceTable>(
            strategy::ReferenceTable::read_csv(c.reference_table, nominal_pfcl));
    } else {
        a.table = std::make_shared<const strategy::ReferenceTable>(
            strategy::build_reference_table(c.plant, c.grid, strategy::MalfunctionEstimate{}, c.horizon));
    }
    return a;
}

nlohmann::json Decision::to_json() const
{
    nlohmann::json j;
    j["action"] = kind == Kind::Accept ? "accept" : kind == Kind::Override ? "override" : "scram";
    if (candidate) j["candidate"] = strategy_json(*candidate);
    return j;
}

Decision Decision::from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string()) {
        throw InvalidDecision("decision needs a string 'action'");
    }
    const auto action = j["action"].get<std::string>();
    Decision d;
    if (action == "accept") {
        d.kind = Kind::Accept;
    } else if (action == "scram") {
        d.kind = Kind::Scram;
    } else if (action == "override") {
        d.kind = Kind::Override;
        const auto it = j.find("candidate");
        if (it == j.end() || !it->is_object() || !it->contains("tau2_end") || !it->contains("t_trip") ||
            !(*it)["tau2_end"].is_number() || !(*it)["t_trip"].is_number()) {
            throw InvalidDecision("override needs candidate.tau2_end and candidate.t_trip");
        }
        strategy::CandidateStrategy c;
        c.tau2_end = (*it)["tau2_end"].get<double>();
        c.t_trip = (*it)["t_trip"].get<double>();
        d.candidate = c;
    } else {
        throw InvalidDecision("unknown action '" + action + "'");
    }
    return d;
}

nlohmann::json SessionResult::to_json(std::size_t top) const
{
    nlohmann::json j;
    j["phase"] = orch::to_string(phase);
    auto& ev = j["events"] = nlohmann::json::array();
    for (const auto& e : events) {
        ev.push_back({{"t", e.t}, {"kind", e.kind}, {"data", e.data}});
    }
    j["realized"] = transient_json(realized);
    j["observed"] = transient_json(observed);
    j["expected"] = expected.time.empty() ? nlohmann::json(nullptr) : transient_json(expected);
    if (recommendation) {
        nlohmann::json r;
        r["t_rcmd"] = recommendation->t_rcmd;
        r["chosen"] = recommendation->chosen;
        r["candidates"] = recommendation->ranked.size();
        auto& list = r["ranked"] = nlohmann::json::array();
        for (std::size_t i = 0; i < recommendation->ranked.size() && i < top; ++i) {
            const auto& rc = recommendation->ranked[i];
            list.push_back({{"index", rc.index},
                            {"strategy", strategy_json(rc.strategy)},
                            {"reward", {{"pfcl", rc.rewards.pfcl},
                                        {"power", rc.rewards.power},
                                        {"torque", rc.rewards.torque},
                                        {"total", rc.rewards.total}}}});
        }
        j["recommendation"] = r;
    } else {
        j["recommendation"] = nullptr;
    }
    j["decision"] = decision ? decision->to_json() : nlohmann::json(nullptr);
    auto& reps = j["discrepancy"] = nlohmann::json::array();
    for (const auto& r : reports) {
        reps.push_back(decision::to_json(r));
    }
    j["scram_reason"] = scram_reason;
    return j;
}

Session::Session(SessionConfig config, Assets assets)
    : config_(std::move(config)), assets_(std::move(assets)), sim_(config_.plant)
{
    config_.validate();
    if (!assets_.dtd || !assets_.dtp || !assets_.table) {
        throw InvalidSpec("session needs both twins and a reference table");
    }
    const auto& m = config_.malfunction;
    const double tau0 = config_.plant.nominal_torque;
    sim_.set_torque_profile(0, PiecewiseLinear::ramp(m.start, tau0, m.end, tau0 * (1.0 - m.magnitude / 100.0)));

    result_.realized = plant::make_state_table();
    std::vector<std::string> names;
    for (auto n : var::state_columns) names.emplace_back(n);
    result_.observed.names = names;
    result_.observed.columns.resize(names.size());
    result_.observed.scenario_id = "observed";
    result_.realized.scenario_id = "realized";
    log("phase", {{"phase", to_string(phase_)}});
    record_sample();
}

void Session::set_phase(Phase p)
{
    phase_ = p;
    result_.phase = p;
    log("phase", {{"phase", to_string(p)}});
}

void Session::log(std::string kind, nlohmann::json data)
{
    result_.events.push_back({time(), std::move(kind), std::move(data)});
}

void Session::record_sample()
{
    const auto& st = sim_.state();
    plant::append_sample(st, result_.realized);
    const auto idx = static_cast<std::uint64_t>(frames_.size());
    frames_.push_back(sensors_.read(st, config_.sensor_noise, derive_seed(config_.seed, idx)));

    // DT-D on the trailing window (edge-padded near t = 0)
    const auto& model = *assets_.dtd;
    const auto w = static_cast<std::size_t>(model.window());
    const std::size_t n = std::min(w, frames_.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(model.config.inputs.size()), static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        const auto& f = frames_[frames_.size() - n + t];
        for (std::size_t i = 0; i < model.config.inputs.size(); ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = f.at(model.config.inputs[i]);
        }
    }
    const Eigen::MatrixXd est = model.estimate(x);

    Sample s;
    s.t = st.time;
    s.sensors = frames_.back().readings;
    for (std::size_t o = 0; o < model.config.outputs.size(); ++o) {
        s.diagnosed.emplace_back(model.config.outputs[o], est(static_cast<Eigen::Index>(o), est.cols() - 1));
    }

    auto& obs = result_.observed;
    std::vector<double> row(obs.names.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < obs.names.size(); ++c) {
        for (const auto& [name, v] : s.diagnosed) {
            if (name == obs.names[c]) row[c] = v;
        }
        for (const auto& [name, v] : s.sensors) {
            if (name == obs.names[c]) row[c] = v;
        }
    }
    append_row(obs, st.time, row);
    samples_.push_back(std::move(s));
}

double Session::diagnosed(const std::string& name) const
{
    for (const auto& [n, v] : samples_.back().diagnosed) {
        if (n == name) return v;
    }
    throw MissingFeature("diagnosis does not estimate '" + name + "'");
}

bool Session::step()
{
    const double now = time();
    switch (phase_) {
    case Phase::Monitoring:
        if (now >= config_.t_rcmd - kTimeEps) {
            recommend();
            return !is_terminal(phase_);
        }
        break;
    case Phase::Executing:
        if (next_check_ < config_.t_ck.size() && now >= config_.t_ck[next_check_] - kTimeEps) {
            check(config_.t_ck[next_check_++]);
            return !is_terminal(phase_);
        }
        if (now >= config_.horizon - kTimeEps) {
            set_phase(Phase::Completed);
            return false;
        }
        break;
    default:
        return false; // paused or done
    }
    const auto k = static_cast<double>(samples_.size());
    sim_.advance_to(k * config_.cadence);
    record_sample();
    return true;
}

void Session::recommend()
{
    set_phase(Phase::PausedForRecommendation);
    const double t_r = time();
    const auto& obs = result_.observed;
    const double pfcl = diagnosed(std::string(var::pfcl_temp));

    const auto psp1 = strategy::predict_psp1_curve(obs.time, obs.column(var::psp1_torque), config_.effective_estimate());
    try {
        candidates_ = strategy::enumerate_candidates(config_.grid, pfcl,
                                                     strategy::table_predicate(*assets_.table, config_.availability_limit),
                                                     psp1, t_r, config_.horizon, config_.cadence);
    } catch (const NoCandidates&) {
        log("recommendation", {{"candidates", 0}, {"diagnosed_pfcl", pfcl}});
        scram("no candidate strategy keeps PFCL below the availability limit");
        return;
    }

    const auto& dtp = *assets_.dtp;
    const double length = config_.history < 0.0 ? std::min(dtp.config.warmup_history, t_r) : config_.history;
    const auto history = dtp::HistoryBuffer::from_transient(obs, dtp.config.states, dtp.config.actions, t_r, length);
    std::vector<strategy::TorqueSchedule> schedules;
    schedules.reserve(candidates_.size());
    for (const auto& c : candidates_) schedules.push_back(c.schedule);
    const auto predicted = dtp::predict_multistep(dtp, history, schedules, config_.horizon - t_r);

    predictions_.clear();
    predictions_.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const auto& p = predicted[i];
        Transient a;
        a.scenario_id = "candidate-" + std::to_string(i);
        a.names = p.names;
        a.columns.resize(p.names.size());
        std::vector<std::size_t> src;
        for (const auto& n : p.names) src.push_back(obs.index_of(n));
        for (std::size_t r = 0; r < obs.size() && obs.time[r] < t_r - kTimeEps; ++r) {
            std::vector<double> row;
            for (auto s : src) row.push_back(obs.columns[s][r]);
            append_row(a, obs.time[r], row);
        }
        for (std::size_t r = 0; r < p.size(); ++r) {
            std::vector<double> row;
            for (const auto& col : p.columns) row.push_back(col[r]);
            append_row(a, p.time[r], row);
        }
        predictions_.push_back({candidates_[i].strategy, std::move(a)});
    }
    result_.recommendation = decision::rank_strategies(predictions_, config_.reward, config_.cadence, t_r);
    const auto& best = result_.recommendation->best();
    log("recommendation", {{"candidates", candidates_.size()},
                           {"diagnosed_pfcl", pfcl},
                           {"history", length},
                           {"best", strategy_json(best.strategy)},
                           {"reward", best.rewards.total}});
    set_phase(Phase::AwaitingDecision);
    if (config_.mode == Mode::AutoAccept) {
        decide(Decision{});
    }
}

void Session::decide(const Decision& d)
{
    if (phase_ != Phase::AwaitingDecision) {
        throw PhaseConflict(std::string("decision not expected in phase ") + to_string(phase_));
    }
    if (d.kind == Decision::Kind::Scram) {
        result_.decision = d;
        log("decision", d.to_json());
        scram("operator scram");
        return;
    }
    std::size_t idx = result_.recommendation->chosen;
    if (d.kind == Decision::Kind::Override) {
        if (!d.candidate) throw InvalidDecision("override without a candidate");
        bool found = false;
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            const auto& c = candidates_[i].strategy;
            if (std::abs(c.tau2_end - d.candidate->tau2_end) < 1e-6 && std::abs(c.t_trip - d.candidate->t_trip) < 1e-6) {
                idx = i;
                found = true;
                break;
            }
        }
        if (!found) throw InvalidDecision("candidate is not among the available strategies");
    }
    Decision recorded = d;
    recorded.candidate = candidates_[idx].strategy;
    result_.decision = recorded;
    log("decision", recorded.to_json());
    sim_.set_torque_profile(1, strategy::predict_psp2_curve(candidates_[idx].strategy));
    result_.expected = predictions_[idx].transient;
    result_.expected.scenario_id = "expected";
    set_phase(Phase::Executing);
}

void Session::check(double t_ck)
{
    set_phase(Phase::Checking);
    const auto report = decision::check_discrepancy(result_.expected, result_.observed, config_.t_rcmd, t_ck,
                                                    config_.reward.discrepancy_limit);
    result_.reports.push_back(report);
    log("discrepancy", decision::to_json(report));
    if (report.verdict == decision::Verdict::Scram) {
        scram("discrepancy above limit");
    } else {
        set_phase(Phase::Executing);
    }
}

void Session::scram(const std::string& reason)
{
    sim_.apply(plant::Scram{});
    result_.scram_reason = reason;
    log("scram", {{"reason", reason}});
    set_phase(Phase::Scrammed);
}

DecisionSource auto_accept()
{
    return [](const Session&) { return Decision{}; };
}

SessionResult run_workflow(const SessionConfig& config, const Assets& assets, const DecisionSource& source)
{
    SessionConfig c = config;
    c.mode = Mode::Interactive; // decisions come from `source`
    Session s(std::move(c), assets);
    while (!is_terminal(s.phase())) {
        if (!s.step() && s.phase() == Phase::AwaitingDecision) {
            s.decide(source(s));
        }
    }
    return s.result();
}

} // namespace twinctl::orch
