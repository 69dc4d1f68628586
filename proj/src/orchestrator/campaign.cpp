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

#include "twinctl/orchestrator/campaign.hpp"

#include <algorithm>
#include <cmath>

#include "twinctl/analytics/metrics.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::orch {

namespace {

std::vector<double> after(const Transient& t, std::string_view col, double t0, double t1)
{
    std::vector<double> out;
    const auto& v = t.column(col);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.time[i] > t0 + 1e-9 && t.time[i] <= t1 + 1e-9) out.push_back(v[i]);
    }
    return out;
}

} // namespace

std::vector<MalfunctionScenario> CampaignSpec::scenarios() const
{
    std::vector<MalfunctionScenario> out;
    for (double s : speeds) {
        for (double m : magnitudes) {
            out.push_back(MalfunctionScenario::from_speed(m, s, 20.0));
        }
    }
    if (include_demo) out.push_back({22.36, 20.0, 70.0});
    return out;
}

nlohmann::json to_json(const CampaignSpec& s)
{
    return {{"magnitudes", s.magnitudes},
            {"speeds", s.speeds},
            {"include_demo", s.include_demo},
            {"session", to_json(s.base)}};
}

CampaignSpec campaign_spec_from_json(const nlohmann::json& j, CampaignSpec c)
{
    if (!j.is_object()) throw ParseError("campaign spec must be an object");
    for (const auto& [k, v] : j.items()) {
        if (k != "magnitudes" && k != "speeds" && k != "include_demo" && k != "session" && k != "description") {
            throw ParseError("unknown campaign key '" + k + "'");
        }
    }
    try {
        if (j.contains("magnitudes")) c.magnitudes = j["magnitudes"].get<std::vector<double>>();
        if (j.contains("speeds")) c.speeds = j["speeds"].get<std::vector<double>>();
        c.include_demo = j.value("include_demo", c.include_demo);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("campaign spec: ") + e.what());
    }
    if (j.contains("session")) c.base = session_config_from_json(j["session"], c.base);
    for (double m : c.magnitudes) {
        if (!(m > 0.0 && m <= 100.0)) throw InvalidSpec("campaign magnitudes must lie in (0, 100]");
    }
    for (double s : c.speeds) {
        if (!(s > 0.0)) throw InvalidSpec("campaign speeds must be positive");
    }
    if (c.scenarios().empty()) throw InvalidSpec("campaign has no cases");
    return c;
}

CaseResult score_case(const MalfunctionScenario& scenario, const SessionResult& r, const SessionConfig& config)
{
    CaseResult c;
    c.scenario = scenario;
    c.phase = r.phase;
    if (r.recommendation) c.candidates = r.recommendation->ranked.size();
    if (r.decision && r.decision->candidate) c.chosen = *r.decision->candidate;
    const auto& pf = r.realized.column(var::pfcl_temp);
    c.peak_pfcl = *std::max_element(pf.begin(), pf.end());
    for (const auto& rep : r.reports) {
        c.zeta_pfcl = std::max(c.zeta_pfcl, rep.zeta_pfcl);
        c.zeta_power = std::max(c.zeta_power, rep.zeta_power);
    }
    c.zeta_max = std::max(c.zeta_pfcl, c.zeta_power);
    if (r.expected.time.empty()) return c;
    const double t1 = r.realized.time.back();
    const auto ep = after(r.expected, var::pfcl_temp, config.t_rcmd, t1);
    const auto rp = after(r.realized, var::pfcl_temp, config.t_rcmd, t1);
    const auto ew = after(r.expected, var::core_power, config.t_rcmd, t1);
    const auto rw = after(r.realized, var::core_power, config.t_rcmd, t1);
    if (!ep.empty() && ep.size() == rp.size()) {
        c.rmse_pfcl = analytics::rmse(ep, rp);
        c.rmse_power = analytics::rmse(ew, rw);
    }
    const auto realized = r.realized.slice(config.t_rcmd, t1);
    const auto expected = r.expected.slice(config.t_rcmd, t1);
    c.eps = decision::decision_error_report(expected, realized, config.reward, scenario.speed(), scenario.magnitude).eps;
    return c;
}

CampaignResult run_campaign(const CampaignSpec& spec, const Assets& assets, bool parallel)
{
    const auto scenarios = spec.scenarios();
    CampaignResult out;
    out.cases.resize(scenarios.size());
    const auto n = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long i = 0; i < n; ++i) {
        const auto& sc = scenarios[static_cast<std::size_t>(i)];
        auto& slot = out.cases[static_cast<std::size_t>(i)];
        SessionConfig cfg = spec.base;
        cfg.malfunction = sc;
        cfg.estimate.reset();
        try {
            slot = score_case(sc, run_workflow(cfg, assets, auto_accept()), cfg);
        } catch (const std::exception& e) {
            slot = CaseResult{};
            slot.scenario = sc;
            slot.error = e.what();
        }
    }
    return out;
}

std::size_t CampaignResult::failures() const
{
    return static_cast<std::size_t>(
        std::count_if(cases.begin(), cases.end(), [](const CaseResult& c) { return !c.error.empty(); }));
}

CsvTable CampaignResult::to_csv() const
{
    CsvTable t;
    t.header = {"magnitude", "speed",      "t1_end",     "phase",     "candidates", "tau2_end", "t_trip",
                "peak_pfcl", "rmse_pfcl",  "rmse_power", "eps_pfcl",  "eps_power",  "eps_torque", "zeta_pfcl", "zeta_power", "zeta_max",
                "error"};
    for (const auto& c : cases) {
        std::string err = c.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        t.add_row({format_double(c.scenario.magnitude), format_double(c.scenario.speed()),
                   format_double(c.scenario.end), to_string(c.phase), std::to_string(c.candidates),
                   format_double(c.chosen.tau2_end), format_double(c.chosen.t_trip), format_double(c.peak_pfcl),
                   format_double(c.rmse_pfcl), format_double(c.rmse_power), format_double(c.eps[0]),
                   format_double(c.eps[1]), format_double(c.eps[2]), format_double(c.zeta_pfcl),
                   format_double(c.zeta_power), format_double(c.zeta_max), err});
    }
    return t;
}

nlohmann::json CampaignResult::to_json() const
{
    auto j = nlohmann::json::array();
    for (const auto& c : cases) {
        j.push_back({{"magnitude", c.scenario.magnitude},
                     {"speed", c.scenario.speed()},
                     {"t1_end", c.scenario.end},
                     {"phase", to_string(c.phase)},
                     {"candidates", c.candidates},
                     {"tau2_end", c.chosen.tau2_end},
                     {"t_trip", c.chosen.t_trip},
                     {"peak_pfcl", c.peak_pfcl},
                     {"rmse_pfcl", c.rmse_pfcl},
                     {"rmse_power", c.rmse_power},
                     {"eps", c.eps},
                     {"zeta_pfcl", c.zeta_pfcl},
                     {"zeta_power", c.zeta_power},
                     {"zeta_max", c.zeta_max},
                     {"error", c.error}});
    }
    return {{"cases", j}, {"failures", failures()}};
}

} // namespace twinctl::orch
