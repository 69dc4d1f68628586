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

#include "twinctl/strategy/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "twinctl/common/csv.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/plant/simulator.hpp"

namespace twinctl::strategy {

namespace {

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    }
    if (n > 1) {
        v.back() = hi;
    }
    return v;
}

bool same(double a, double b)
{
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

} // namespace

void MalfunctionEstimate::validate() const
{
    if (!(t_acc < t1_end) || !(tau1_end >= 0.0) || !std::isfinite(t1_end) || !std::isfinite(tau1_end)) {
        throw InvalidEstimate("malfunction estimate needs t_acc < t1_end and tau1_end >= 0");
    }
}

void CandidateStrategy::validate() const
{
    if (!(t_trip < t2_end) || !(tau2_end >= 0.0) || !(tau0 > 0.0)) {
        throw InvalidSpec("candidate needs t_trip < t2_end and non-negative torques");
    }
}

PiecewiseLinear predict_psp1_curve(const std::vector<double>& times, const std::vector<double>& torques,
                                   const MalfunctionEstimate& e)
{
    e.validate();
    if (times.empty() || times.size() != torques.size()) {
        throw InvalidEstimate("pump-1 curve needs a non-empty measured segment");
    }
    std::vector<Breakpoint> pts;
    pts.reserve(times.size() + 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
        pts.push_back({times[i], torques[i]});
    }
    const double t_rcmd = times.back();
    const double tau_now = torques.back();
    if (e.t1_end > t_rcmd) {
        pts.push_back({e.t1_end, e.tau1_end});
    }
    else if (e.t1_end + kSettleTime > t_rcmd) {
        pts.push_back({e.t1_end + kSettleTime, e.tau1_end});
    }
    else if (std::abs(tau_now - e.tau1_end) > kPlateauTolerance) {
        throw InvalidEstimate("malfunction should be over by t_rcmd but the measured torque " + std::to_string(tau_now) +
                              " N·m is far from tau1_end " + std::to_string(e.tau1_end) + " N·m");
    }
    return PiecewiseLinear(std::move(pts));
}

PiecewiseLinear predict_psp2_curve(const CandidateStrategy& c)
{
    c.validate();
    return PiecewiseLinear::ramp(c.t_trip, c.tau0, c.t2_end, c.tau2_end);
}

TorqueSchedule make_schedule(PiecewiseLinear psp1, PiecewiseLinear psp2, double t_rcmd, double horizon,
                             double cadence)
{
    if (!(cadence > 0.0) || !(horizon > 0.0)) {
        throw InvalidSpec("schedule needs a positive horizon and cadence");
    }
    TorqueSchedule s;
    s.t_rcmd = t_rcmd;
    s.horizon = horizon;
    s.cadence = cadence;
    const auto n = static_cast<std::size_t>(std::llround(horizon / cadence)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = cadence * static_cast<double>(i);
        s.time.push_back(t);
        s.psp1_samples.push_back(psp1(t));
        s.psp2_samples.push_back(psp2(t));
    }
    s.psp1 = std::move(psp1);
    s.psp2 = std::move(psp2);
    return s;
}

CandidateGrid CandidateGrid::standard(double nominal_torque)
{
    CandidateGrid g;
    g.tau0 = nominal_torque;
    g.tau2_min = nominal_torque;
    g.tau2_max = 1.8 * nominal_torque;
    g.tau2_end = linspace(nominal_torque, 1.5 * nominal_torque, 25);
    g.t_trip = linspace(50.0, 100.0, 12);
    return g;
}

std::vector<CandidateStrategy> CandidateGrid::candidates() const
{
    if (tau2_end.empty() || t_trip.empty()) {
        throw NoCandidates("candidate grid is empty");
    }
    std::vector<CandidateStrategy> out;
    for (double tau : tau2_end) {
        if (tau < tau2_min - 1e-9 || tau > tau2_max + 1e-9) {
            throw InvalidSpec("tau2_end " + std::to_string(tau) + " N·m is outside the allowed torque band");
        }
        for (double t : t_trip) {
            out.push_back({tau, t, t + ramp_duration, tau0});
        }
    }
    return out;
}

nlohmann::json to_json(const CandidateGrid& g)
{
    return {{"tau2_end", g.tau2_end}, {"t_trip", g.t_trip}, {"ramp_duration", g.ramp_duration}, {"tau0", g.tau0},
            {"tau2_min", g.tau2_min}, {"tau2_max", g.tau2_max}};
}

CandidateGrid grid_from_json(const nlohmann::json& j, double nominal_torque)
{
    CandidateGrid g = CandidateGrid::standard(nominal_torque);
    auto axis = [](const nlohmann::json& v) {
        if (v.is_object() && v.contains("linspace")) {
            const auto& l = v.at("linspace");
            return linspace(l.at(0).get<double>(), l.at(1).get<double>(), l.at(2).get<int>());
        }
        return v.get<std::vector<double>>();
    };
    for (const auto& [k, v] : j.items()) {
        if (k == "tau2_end") {
            g.tau2_end = axis(v);
        }
        else if (k == "tau2_end_fraction") {
            g.tau2_end = axis(v);
            for (double& t : g.tau2_end) {
                t *= nominal_torque;
            }
        }
        else if (k == "t_trip") {
            g.t_trip = axis(v);
        }
        else if (k == "ramp_duration") {
            g.ramp_duration = v.get<double>();
        }
        else if (k == "tau0") {
            g.tau0 = v.get<double>();
        }
        else if (k == "tau2_min") {
            g.tau2_min = v.get<double>();
        }
        else if (k == "tau2_max") {
            g.tau2_max = v.get<double>();
        }
        else {
            throw ParseError("unknown candidate-grid key '" + k + "'");
        }
    }
    if (!(g.ramp_duration > 0.0)) {
        throw InvalidSpec("ramp_duration must be positive");
    }
    return g;
}

std::vector<Candidate> enumerate_candidates(const CandidateGrid& grid, double diagnosed_pfcl,
                                            const AvailabilityPredicate& available, const PiecewiseLinear& psp1,
                                            double t_rcmd, double horizon, double cadence)
{
    std::vector<Candidate> out;
    for (const auto& c : grid.candidates()) {
        if (available && !available(c, diagnosed_pfcl)) {
            continue;
        }
        out.push_back({c, make_schedule(psp1, predict_psp2_curve(c), t_rcmd, horizon, cadence)});
    }
    if (out.empty()) {
        throw NoCandidates("no mitigation candidate is available at diagnosed PFCL " + std::to_string(diagnosed_pfcl) +
                           " °C");
    }
    return out;
}

std::optional<double> ReferenceTable::lookup(const CandidateStrategy& c) const
{
    for (const auto& r : rows) {
        if (same(r.tau2_end, c.tau2_end) && same(r.t_trip, c.t_trip)) {
            return r.max_reachable_pfcl;
        }
    }
    return std::nullopt;
}

void ReferenceTable::write_csv(const std::filesystem::path& path) const
{
    CsvTable t;
    t.header = {"tau2_end", "t_trip", "max_reachable_pfcl"};
    for (const auto& r : rows) {
        t.add_numeric_row({r.tau2_end, r.t_trip, r.max_reachable_pfcl});
    }
    twinctl::write_csv(path, t);
}

ReferenceTable ReferenceTable::read_csv(const std::filesystem::path& path, double nominal_pfcl)
{
    const CsvTable t = twinctl::read_csv(path);
    if (t.header != std::vector<std::string>{"tau2_end", "t_trip", "max_reachable_pfcl"}) {
        throw ParseError("reference table header must be tau2_end,t_trip,max_reachable_pfcl");
    }
    ReferenceTable out;
    out.nominal_pfcl = nominal_pfcl;
    for (const auto& row : t.rows) {
        out.rows.push_back({parse_double(row.at(0)), parse_double(row.at(1)), parse_double(row.at(2))});
    }
    return out;
}

ReferenceTable build_reference_table(const plant::PlantParams& params, const CandidateGrid& grid,
                                     const MalfunctionEstimate& reference, double horizon)
{
    reference.validate();
    const auto candidates = grid.candidates();
    const auto malfunction =
        PiecewiseLinear::ramp(reference.t_acc, params.nominal_torque, reference.t1_end, reference.tau1_end);
    ReferenceTable table;
    table.nominal_pfcl = plant::steady_state_init(params).fuel_temp;
    table.rows.resize(candidates.size());
    const auto n = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto& c = candidates[static_cast<std::size_t>(i)];
        const auto tr = plant::run_transient(params, malfunction, predict_psp2_curve(c), horizon, 1.0);
        const auto& pfcl = tr.column(var::pfcl_temp);
        table.rows[static_cast<std::size_t>(i)] = {c.tau2_end, c.t_trip, *std::max_element(pfcl.begin(), pfcl.end())};
    }
    return table;
}

AvailabilityPredicate table_predicate(ReferenceTable table, double limit)
{
    return [table = std::move(table), limit](const CandidateStrategy& c, double diagnosed) {
        const auto peak = table.lookup(c);
        return peak && *peak + (diagnosed - table.nominal_pfcl) < limit;
    };
}

} // namespace twinctl::strategy
