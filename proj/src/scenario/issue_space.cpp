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

#include "twinctl/scenario/issue_space.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "twinctl/common/error.hpp"
#include "twinctl/plant/simulator.hpp"

namespace twinctl::scenario {

namespace {

double unit_draw(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double draw(const SampleRule& r, std::mt19937_64& gen)
{
    const double lo = r.min();
    const double hi = r.max();
    const double u = unit_draw(gen);
    return lo == hi ? lo : lo + (hi - lo) * u;
}

void require_nonempty(const SampleRule& r, const char* name)
{
    if (r.values.empty()) {
        throw EmptySpace(std::string("sampling rule '") + name + "' yields no samples");
    }
}

void require_within(const SampleRule& r, double lo, double hi, const char* name)
{
    require_nonempty(r, name);
    for (double v : r.values) {
        if (!std::isfinite(v) || v < lo || v > hi) {
            throw InvalidSpec(std::string("rule '") + name + "' has a value outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
    }
}

SampleRule rule_from_json(const nlohmann::json& j, const char* name)
{
    if (j.is_number()) {
        return SampleRule::fixed(j.get<double>());
    }
    if (j.is_object() && j.contains("values")) {
        return {j.at("values").get<std::vector<double>>()};
    }
    if (j.is_object() && j.contains("linspace")) {
        const auto& a = j.at("linspace");
        if (!a.is_array() || a.size() != 3) {
            throw ParseError(std::string("'") + name + "': linspace needs [lo, hi, count]");
        }
        return SampleRule::linspace(a[0].get<double>(), a[1].get<double>(), a[2].get<int>());
    }
    throw ParseError(std::string("'") + name + "': expected a number, {values} or {linspace}");
}

nlohmann::json rule_to_json(const SampleRule& r)
{
    if (r.values.size() == 1) {
        return r.values.front();
    }
    return {{"values", r.values}};
}

EndRule end_from_json(const nlohmann::json& j, const char* name)
{
    if (j.is_object() && j.contains("offset")) {
        return {true, rule_from_json(j.at("offset"), name)};
    }
    return {false, rule_from_json(j, name)};
}

nlohmann::json end_to_json(const EndRule& e)
{
    if (e.relative) {
        return {{"offset", rule_to_json(e.rule)}};
    }
    return rule_to_json(e.rule);
}

double resolve_end(const EndRule& e, double start, double value)
{
    return e.relative ? start + value : value;
}

bool inside(const SampleRule& r, double v)
{
    constexpr double kSlack = 1e-9;
    return v >= r.min() - kSlack && v <= r.max() + kSlack;
}

} // namespace

SampleRule SampleRule::linspace(double lo, double hi, int count)
{
    if (count < 1) {
        throw EmptySpace("linspace count must be at least 1");
    }
    SampleRule r;
    if (count == 1) {
        r.values.push_back(lo);
        return r;
    }
    for (int i = 0; i < count; ++i) {
        // endpoints exact, interior by interpolation
        r.values.push_back(i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1));
    }
    return r;
}

double SampleRule::min() const
{
    if (values.empty()) {
        throw EmptySpace("empty sampling rule");
    }
    return *std::min_element(values.begin(), values.end());
}

double SampleRule::max() const
{
    if (values.empty()) {
        throw EmptySpace("empty sampling rule");
    }
    return *std::max_element(values.begin(), values.end());
}

void IssueSpaceSpec::validate() const
{
    if (!(horizon > 0.0) || !(output_dt > 0.0)) {
        throw InvalidSpec("horizon and output_dt must be positive");
    }
    require_within(malfunction_magnitude, 0.0, 100.0, "malfunction_magnitude");
    require_within(mitigation_magnitude, 100.0, 180.0, "mitigation_magnitude");
    require_within(malfunction_start, 0.0, horizon, "malfunction_start");
    require_within(mitigation_start, 0.0, horizon, "mitigation_start");
    require_nonempty(malfunction_end.rule, "malfunction_end");
    require_nonempty(mitigation_end.rule, "mitigation_end");
    auto check_window = [&](const SampleRule& start, const EndRule& end, const char* name) {
        for (double s : start.values) {
            for (double e : end.rule.values) {
                const double t_end = resolve_end(end, s, e);
                if (!(t_end > s) || t_end > horizon) {
                    throw InvalidSpec(std::string(name) + " window must satisfy start < end <= horizon");
                }
            }
        }
    };
    check_window(malfunction_start, malfunction_end, "malfunction");
    check_window(mitigation_start, mitigation_end, "mitigation");
    if (mode == SamplingMode::Random && random_count < 1) {
        throw EmptySpace("random sampling needs a positive count");
    }
}

std::size_t IssueSpaceSpec::point_count() const
{
    if (mode == SamplingMode::Random) {
        return static_cast<std::size_t>(std::max(random_count, 0));
    }
    return malfunction_magnitude.values.size() * malfunction_start.values.size() *
           malfunction_end.rule.values.size() * mitigation_magnitude.values.size() *
           mitigation_start.values.size() * mitigation_end.rule.values.size();
}

IssueParams IssuePoint::to_params() const
{
    return {
        {"malfunction_magnitude", malfunction_magnitude},
        {"malfunction_start", malfunction_start},
        {"malfunction_end", malfunction_end},
        {"mitigation_magnitude", mitigation_magnitude},
        {"mitigation_start", mitigation_start},
        {"mitigation_end", mitigation_end},
    };
}

IssuePoint IssuePoint::from_params(const IssueParams& params)
{
    IssuePoint p;
    auto get = [&](const char* key) {
        for (const auto& [k, v] : params) {
            if (k == key) {
                return v;
            }
        }
        throw MissingFeature(std::string("issue point lacks '") + key + "'");
    };
    p.malfunction_magnitude = get("malfunction_magnitude");
    p.malfunction_start = get("malfunction_start");
    p.malfunction_end = get("malfunction_end");
    p.mitigation_magnitude = get("mitigation_magnitude");
    p.mitigation_start = get("mitigation_start");
    p.mitigation_end = get("mitigation_end");
    return p;
}

std::vector<IssuePoint> sample_issue_space(const IssueSpaceSpec& spec, std::uint64_t seed)
{
    spec.validate();
    std::vector<IssuePoint> points;
    if (spec.mode == SamplingMode::Random) {
        std::mt19937_64 gen(seed);
        points.reserve(static_cast<std::size_t>(spec.random_count));
        for (int i = 0; i < spec.random_count; ++i) {
            IssuePoint p;
            p.malfunction_magnitude = draw(spec.malfunction_magnitude, gen);
            p.malfunction_start = draw(spec.malfunction_start, gen);
            p.malfunction_end = resolve_end(spec.malfunction_end, p.malfunction_start,
                                            draw(spec.malfunction_end.rule, gen));
            p.mitigation_magnitude = draw(spec.mitigation_magnitude, gen);
            p.mitigation_start = draw(spec.mitigation_start, gen);
            p.mitigation_end = resolve_end(spec.mitigation_end, p.mitigation_start,
                                           draw(spec.mitigation_end.rule, gen));
            points.push_back(p);
        }
        return points;
    }
    points.reserve(spec.point_count());
    for (double mag : spec.malfunction_magnitude.values) {
        for (double ms : spec.malfunction_start.values) {
            for (double me : spec.malfunction_end.rule.values) {
                for (double mit : spec.mitigation_magnitude.values) {
                    for (double ts : spec.mitigation_start.values) {
                        for (double te : spec.mitigation_end.rule.values) {
                            IssuePoint p;
                            p.malfunction_magnitude = mag;
                            p.malfunction_start = ms;
                            p.malfunction_end = resolve_end(spec.malfunction_end, ms, me);
                            p.mitigation_magnitude = mit;
                            p.mitigation_start = ts;
                            p.mitigation_end = resolve_end(spec.mitigation_end, ts, te);
                            points.push_back(p);
                        }
                    }
                }
            }
        }
    }
    return points;
}

bool contains(const IssueSpaceSpec& spec, const IssuePoint& p)
{
    auto end_ok = [](const EndRule& e, double start, double end) {
        return inside(e.rule, e.relative ? end - start : end);
    };
    return inside(spec.malfunction_magnitude, p.malfunction_magnitude) &&
           inside(spec.malfunction_start, p.malfunction_start) &&
           end_ok(spec.malfunction_end, p.malfunction_start, p.malfunction_end) &&
           inside(spec.mitigation_magnitude, p.mitigation_magnitude) &&
           inside(spec.mitigation_start, p.mitigation_start) &&
           end_ok(spec.mitigation_end, p.mitigation_start, p.mitigation_end);
}

PiecewiseLinear malfunction_profile(const IssuePoint& p, double nominal_torque)
{
    return PiecewiseLinear::ramp(p.malfunction_start, nominal_torque, p.malfunction_end,
                                 nominal_torque * (1.0 - p.malfunction_magnitude / 100.0));
}

PiecewiseLinear mitigation_profile(const IssuePoint& p, double nominal_torque)
{
    return PiecewiseLinear::ramp(p.mitigation_start, nominal_torque, p.mitigation_end,
                                 nominal_torque * p.mitigation_magnitude / 100.0);
}

Transient simulate_point(const plant::PlantParams& params, const IssueSpaceSpec& spec,
                         const IssuePoint& point)
{
    Transient t = plant::run_transient(params, malfunction_profile(point, params.nominal_torque),
                                       mitigation_profile(point, params.nominal_torque), spec.horizon,
                                       spec.output_dt);
    t.issue_point = point.to_params();
    return t;
}

nlohmann::json to_json(const IssueSpaceSpec& s)
{
    nlohmann::json sampling = {{"mode", s.mode == SamplingMode::Grid ? "grid" : "random"}};
    if (s.mode == SamplingMode::Random) {
        sampling["n"] = s.random_count;
    }
    return {
        {"malfunction_magnitude", rule_to_json(s.malfunction_magnitude)},
        {"malfunction_start", rule_to_json(s.malfunction_start)},
        {"malfunction_end", end_to_json(s.malfunction_end)},
        {"mitigation_magnitude", rule_to_json(s.mitigation_magnitude)},
        {"mitigation_start", rule_to_json(s.mitigation_start)},
        {"mitigation_end", end_to_json(s.mitigation_end)},
        {"horizon", s.horizon},
        {"output_dt", s.output_dt},
        {"sampling", sampling},
    };
}

IssueSpaceSpec spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ParseError("issue-space spec must be a JSON object");
    }
    static const char* const kKeys[] = {
        "malfunction_magnitude", "malfunction_start", "malfunction_end", "mitigation_magnitude",
        "mitigation_start", "mitigation_end", "horizon", "output_dt", "sampling", "description",
    };
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
            std::end(kKeys)) {
            throw ParseError("unknown issue-space key '" + key + "'");
        }
    }
    IssueSpaceSpec s;
    if (j.contains("malfunction_magnitude")) {
        s.malfunction_magnitude = rule_from_json(j.at("malfunction_magnitude"), "malfunction_magnitude");
    }
    if (j.contains("malfunction_start")) {
        s.malfunction_start = rule_from_json(j.at("malfunction_start"), "malfunction_start");
    }
    if (j.contains("malfunction_end")) {
        s.malfunction_end = end_from_json(j.at("malfunction_end"), "malfunction_end");
    }
    if (j.contains("mitigation_magnitude")) {
        s.mitigation_magnitude = rule_from_json(j.at("mitigation_magnitude"), "mitigation_magnitude");
    }
    if (j.contains("mitigation_start")) {
        s.mitigation_start = rule_from_json(j.at("mitigation_start"), "mitigation_start");
    }
    if (j.contains("mitigation_end")) {
        s.mitigation_end = end_from_json(j.at("mitigation_end"), "mitigation_end");
    }
    s.horizon = j.value("horizon", s.horizon);
    s.output_dt = j.value("output_dt", s.output_dt);
    if (j.contains("sampling")) {
        const auto& m = j.at("sampling");
        const std::string mode = m.value("mode", "grid");
        if (mode == "grid") {
            s.mode = SamplingMode::Grid;
        }
        else if (mode == "random") {
            s.mode = SamplingMode::Random;
            s.random_count = m.value("n", 0);
        }
        else {
            throw ParseError("sampling mode must be 'grid' or 'random'");
        }
    }
    s.validate();
    return s;
}

} // namespace twinctl::scenario
