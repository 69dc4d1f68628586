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

#include "twinctl/decision/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twinctl/analytics/metrics.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::decision {

namespace {

bool close(double a, double b)
{
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

std::vector<double> sorted_unique(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), close), v.end());
    return v;
}

std::size_t locate(const std::vector<double>& axis, double v)
{
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (close(axis[i], v)) {
            return i;
        }
    }
    return axis.size();
}

// Samples of both transients inside [t0, t1], checked to share time stamps.
std::pair<Transient, Transient> window(const Transient& a, const Transient& b, double t0, double t1)
{
    Transient wa = a.slice(t0, t1);
    Transient wb = b.slice(t0, t1);
    if (wa.size() == 0 || wa.size() != wb.size()) {
        throw WindowMismatch("transients do not cover [" + std::to_string(t0) + ", " + std::to_string(t1) +
                             "] on the same time grid");
    }
    for (std::size_t i = 0; i < wa.size(); ++i) {
        if (std::abs(wa.time[i] - wb.time[i]) > 1e-9) {
            throw WindowMismatch("time stamps differ at sample " + std::to_string(i));
        }
    }
    return {std::move(wa), std::move(wb)};
}

} // namespace

const char* to_string(Region r)
{
    switch (r) {
    case Region::Best:
        return "best";
    case Region::Good:
        return "good";
    case Region::Bad:
        return "bad";
    }
    return "bad";
}

void RewardSpec::validate() const
{
    if (!(pfcl_floor < pfcl_best_lo && pfcl_best_lo < pfcl_best_hi && pfcl_best_hi < pfcl_good_hi)) {
        throw InvalidSpec("PFCL bounds must satisfy floor < best_lo < best_hi < good_hi");
    }
    if (!(0.0 <= power_best && power_best < power_good) || !(0.0 <= torque_best && torque_best < torque_good)) {
        throw InvalidSpec("variation bounds must satisfy 0 <= best < good");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw InvalidSpec("weights must be non-negative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidSpec("weights must sum to 1");
    }
    if (!(nominal_power > 0.0) || !(nominal_torque > 0.0) || !(discrepancy_limit > 0.0)) {
        throw InvalidSpec("nominal references and discrepancy limit must be positive");
    }
}

double RewardSpec::reward(Region r) const
{
    switch (r) {
    case Region::Best:
        return reward_best;
    case Region::Good:
        return reward_good;
    case Region::Bad:
        return reward_bad;
    }
    return reward_bad;
}

nlohmann::json to_json(const RewardSpec& s)
{
    return {{"pfcl_best_lo", s.pfcl_best_lo},   {"pfcl_best_hi", s.pfcl_best_hi},
            {"pfcl_good_hi", s.pfcl_good_hi},   {"pfcl_floor", s.pfcl_floor},
            {"power_best", s.power_best},       {"power_good", s.power_good},
            {"torque_best", s.torque_best},     {"torque_good", s.torque_good},
            {"reward_best", s.reward_best},     {"reward_good", s.reward_good},
            {"reward_bad", s.reward_bad},       {"weights", s.weights},
            {"nominal_power", s.nominal_power}, {"nominal_torque", s.nominal_torque},
            {"discrepancy_limit", s.discrepancy_limit}};
}

RewardSpec reward_spec_from_json(const nlohmann::json& j, RewardSpec s)
{
    const nlohmann::json known = to_json(s);
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) {
            throw ParseError("unknown reward key '" + k + "'");
        }
    }
    s.pfcl_best_lo = j.value("pfcl_best_lo", s.pfcl_best_lo);
    s.pfcl_best_hi = j.value("pfcl_best_hi", s.pfcl_best_hi);
    s.pfcl_good_hi = j.value("pfcl_good_hi", s.pfcl_good_hi);
    s.pfcl_floor = j.value("pfcl_floor", s.pfcl_floor);
    s.power_best = j.value("power_best", s.power_best);
    s.power_good = j.value("power_good", s.power_good);
    s.torque_best = j.value("torque_best", s.torque_best);
    s.torque_good = j.value("torque_good", s.torque_good);
    s.reward_best = j.value("reward_best", s.reward_best);
    s.reward_good = j.value("reward_good", s.reward_good);
    s.reward_bad = j.value("reward_bad", s.reward_bad);
    s.weights = j.value("weights", s.weights);
    s.nominal_power = j.value("nominal_power", s.nominal_power);
    s.nominal_torque = j.value("nominal_torque", s.nominal_torque);
    s.discrepancy_limit = j.value("discrepancy_limit", s.discrepancy_limit);
    s.validate();
    return s;
}

Region classify_region(Attribute a, double v, const RewardSpec& s)
{
    if (!std::isfinite(v)) {
        return Region::Bad;
    }
    switch (a) {
    case Attribute::Pfcl:
        if (v > s.pfcl_best_lo && v <= s.pfcl_best_hi) {
            return Region::Best;
        }
        if ((v > s.pfcl_best_hi && v <= s.pfcl_good_hi) || (v > s.pfcl_floor && v <= s.pfcl_best_lo)) {
            return Region::Good;
        }
        return Region::Bad;
    case Attribute::Power:
        v = std::abs(v);
        return v <= s.power_best ? Region::Best : v <= s.power_good ? Region::Good : Region::Bad;
    case Attribute::Torque:
        v = std::abs(v);
        return v <= s.torque_best ? Region::Best : v <= s.torque_good ? Region::Good : Region::Bad;
    }
    return Region::Bad;
}

std::array<std::vector<double>, 3> reward_series(const Transient& tr, const RewardSpec& s)
{
    const auto& pfcl = tr.column(var::pfcl_temp);
    const auto& power = tr.column(var::core_power);
    const auto& torque = tr.column(var::psp2_torque);
    std::array<std::vector<double>, 3> out;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out[0].push_back(s.reward(classify_region(Attribute::Pfcl, pfcl[i], s)));
        out[1].push_back(
            s.reward(classify_region(Attribute::Power, (power[i] - s.nominal_power) / s.nominal_power, s)));
        out[2].push_back(
            s.reward(classify_region(Attribute::Torque, (torque[i] - s.nominal_torque) / s.nominal_torque, s)));
    }
    return out;
}

RewardBreakdown accumulate_rewards(const Transient& tr, const RewardSpec& s, double dt)
{
    if (tr.size() < 2) {
        throw WindowMismatch("reward integration needs at least two samples");
    }
    if (std::abs(tr.cadence() - dt) > 1e-9 * dt) {
        throw WindowMismatch("transient cadence differs from the reward step");
    }
    const auto& pfcl = tr.column(var::pfcl_temp);
    const auto& power = tr.column(var::core_power);
    const auto& torque = tr.column(var::psp2_torque);
    RewardBreakdown b;
    b.labels.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const std::array<Region, 3> r = {
            classify_region(Attribute::Pfcl, pfcl[i], s),
            classify_region(Attribute::Power, (power[i] - s.nominal_power) / s.nominal_power, s),
            classify_region(Attribute::Torque, (torque[i] - s.nominal_torque) / s.nominal_torque, s),
        };
        b.labels.push_back(r);
        if (i + 1 < tr.size()) {
            b.pfcl += s.reward(r[0]) * dt;
            b.power += s.reward(r[1]) * dt;
            b.torque += s.reward(r[2]) * dt;
        }
    }
    b.total = s.weights[0] * b.pfcl + s.weights[1] * b.power + s.weights[2] * b.torque;
    return b;
}

Recommendation rank_strategies(const std::vector<CandidatePrediction>& predictions, const RewardSpec& spec, double dt,
                               double t_rcmd)
{
    if (predictions.empty()) {
        throw NoCandidates("nothing to rank");
    }
    Recommendation rec;
    rec.t_rcmd = t_rcmd;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        rec.ranked.push_back({i, predictions[i].strategy, accumulate_rewards(predictions[i].transient, spec, dt)});
    }
    std::stable_sort(rec.ranked.begin(), rec.ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.rewards.total != b.rewards.total) {
            return a.rewards.total > b.rewards.total;
        }
        if (a.strategy.tau2_end != b.strategy.tau2_end) {
            return a.strategy.tau2_end < b.strategy.tau2_end;
        }
        return a.strategy.t_trip < b.strategy.t_trip;
    });
    rec.chosen = rec.ranked.front().index;

    std::vector<double> taus;
    std::vector<double> trips;
    for (const auto& p : predictions) {
        taus.push_back(p.strategy.tau2_end);
        trips.push_back(p.strategy.t_trip);
    }
    rec.grid.tau2_end = sorted_unique(taus);
    rec.grid.t_trip = sorted_unique(trips);
    rec.grid.total.assign(rec.grid.tau2_end.size(),
                          std::vector<double>(rec.grid.t_trip.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const auto& r : rec.ranked) {
        rec.grid.total[locate(rec.grid.tau2_end, r.strategy.tau2_end)][locate(rec.grid.t_trip, r.strategy.t_trip)] =
            r.rewards.total;
    }
    return rec;
}

CsvTable RewardGrid::to_csv() const
{
    CsvTable t;
    t.header = {"tau2_end", "t_trip", "total_reward"};
    for (std::size_t i = 0; i < tau2_end.size(); ++i) {
        for (std::size_t j = 0; j < t_trip.size(); ++j) {
            t.add_row({format_double(tau2_end[i]), format_double(t_trip[j]),
                       std::isnan(total[i][j]) ? "" : format_double(total[i][j])});
        }
    }
    return t;
}

const char* verdict_name(Verdict v)
{
    return v == Verdict::Scram ? "scram" : "continue";
}

nlohmann::json to_json(const DiscrepancyReport& r)
{
    return {{"t_ck", r.t_ck},           {"rmse_power", r.rmse_power}, {"rmse_pfcl", r.rmse_pfcl},
            {"zeta_power", r.zeta_power}, {"zeta_pfcl", r.zeta_pfcl},   {"limit", r.limit},
            {"verdict", verdict_name(r.verdict)}};
}

Verdict discrepancy_verdict(double zeta_power, double zeta_pfcl, double limit)
{
    // NaN counts as over the limit
    return (zeta_power <= limit && zeta_pfcl <= limit) ? Verdict::Continue : Verdict::Scram;
}

DiscrepancyReport check_discrepancy(const Transient& expected, const Transient& observed, double t_rcmd, double t_ck,
                                    double power_reference, double pfcl_reference, double limit)
{
    if (!(power_reference != 0.0) || !(pfcl_reference != 0.0)) {
        throw ZeroNormalizer("discrepancy references must be non-zero");
    }
    const auto [e, o] = window(expected, observed, t_rcmd, t_ck);
    DiscrepancyReport r;
    r.t_ck = t_ck;
    r.limit = limit;
    r.rmse_power = analytics::rmse(e.column(var::core_power), o.column(var::core_power));
    r.rmse_pfcl = analytics::rmse(e.column(var::pfcl_temp), o.column(var::pfcl_temp));
    r.zeta_power = r.rmse_power / std::abs(power_reference);
    r.zeta_pfcl = r.rmse_pfcl / std::abs(pfcl_reference);
    r.verdict = discrepancy_verdict(r.zeta_power, r.zeta_pfcl, limit);
    return r;
}

DiscrepancyReport check_discrepancy(const Transient& expected, const Transient& observed, double t_rcmd, double t_ck,
                                    double limit)
{
    if (observed.size() == 0 || std::abs(observed.time.front()) > 1e-9) {
        throw WindowMismatch("observed transient must start at t = 0 to supply the references");
    }
    return check_discrepancy(expected, observed, t_rcmd, t_ck, observed.column(var::core_power).front(),
                             observed.column(var::pfcl_temp).front(), limit);
}

double decision_error(const std::vector<double>& predicted, const std::vector<double>& realized, double normalizer)
{
    if (normalizer == 0.0 || !std::isfinite(normalizer)) {
        throw ZeroNormalizer("decision error normalizer must be non-zero");
    }
    return analytics::rmse(predicted, realized) / std::abs(normalizer);
}

DecisionErrorReport decision_error_report(const Transient& predicted, const Transient& realized,
                                          const RewardSpec& spec, double speed, double magnitude)
{
    const double t0 = std::max(predicted.time.front(), realized.time.front());
    const double t1 = std::min(predicted.time.back(), realized.time.back());
    const auto [p, r] = window(predicted, realized, t0, t1);
    const auto rp = reward_series(p, spec);
    const auto rr = reward_series(r, spec);
    DecisionErrorReport out;
    out.speed = speed;
    out.magnitude = magnitude;
    for (std::size_t k = 0; k < 3; ++k) {
        out.eps[k] = decision_error(rp[k], rr[k], spec.reward_best);
    }
    return out;
}

} // namespace twinctl::decision
