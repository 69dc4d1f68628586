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

#include "twinctl/scenario/database.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <omp.h>

#include "twinctl/common/csv.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/seed.hpp"

namespace twinctl::scenario {

namespace {

constexpr const char* kManifestSchema = "twinctl.database/1";
constexpr double kMaxFailureFraction = 0.01;

std::string scenario_name(std::size_t index)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%05zu", index);
    return buf;
}

struct Slot {
    bool ok = false;
    Transient transient;
    std::string error;
};

Slot run_one(const plant::PlantParams& params, const IssueSpaceSpec& spec, const IssuePoint& point,
             std::size_t index, std::uint64_t seed)
{
    Slot slot;
    try {
        slot.transient = simulate_point(params, spec, point);
        slot.transient.scenario_id = scenario_name(index);
        slot.transient.seed = derive_seed(seed, index);
        slot.ok = true;
    }
    catch (const Error& e) {
        slot.error = e.what();
    }
    return slot;
}

Database assemble(const IssueSpaceSpec& spec, const plant::PlantParams& params, std::uint64_t seed,
                  std::vector<Slot>& slots)
{
    Database db;
    db.spec = spec;
    db.plant_fingerprint = params.fingerprint();
    db.seed = seed;
    db.transients.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].ok) {
            db.transients.push_back(std::move(slots[i].transient));
        }
        else {
            db.failures.push_back({i, scenario_name(i), slots[i].error});
        }
    }
    const double limit = kMaxFailureFraction * static_cast<double>(slots.size());
    if (static_cast<double>(db.failures.size()) > limit) {
        throw GenerationFailed(std::to_string(db.failures.size()) + " of " + std::to_string(slots.size()) +
                               " transients failed; first: " + db.failures.front().scenario_id + ": " +
                               db.failures.front().message);
    }
    return db;
}

} // namespace

std::string Database::fingerprint() const
{
    std::string text = plant_fingerprint + "|" + to_json(spec).dump() + "|" + std::to_string(seed);
    for (const auto& t : transients) {
        text += "|" + t.scenario_id;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

Database generate_database(const IssueSpaceSpec& spec, const plant::PlantParams& params,
                           std::uint64_t seed, int jobs)
{
    params.validate();
    const auto points = sample_issue_space(spec, seed);
    std::vector<Slot> slots(points.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        slots[idx] = run_one(params, spec, points[idx], idx, seed);
    }
    return assemble(spec, params, seed, slots);
}

Database generate_database_serial(const IssueSpaceSpec& spec, const plant::PlantParams& params,
                                  std::uint64_t seed)
{
    params.validate();
    const auto points = sample_issue_space(spec, seed);
    std::vector<Slot> slots(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        slots[i] = run_one(params, spec, points[i], i, seed);
    }
    return assemble(spec, params, seed, slots);
}

void write_database(const std::filesystem::path& dir, const Database& db)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    }
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& t : db.transients) {
        const std::string file = t.scenario_id + ".csv";
        write_transient_csv(dir / file, t);
        nlohmann::json issue = nlohmann::json::object();
        for (const auto& [k, v] : t.issue_point) {
            issue[k] = v;
        }
        entries.push_back({{"id", t.scenario_id}, {"file", file}, {"seed", t.seed}, {"issue", issue}});
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : db.failures) {
        failures.push_back({{"index", f.index}, {"id", f.scenario_id}, {"message", f.message}});
    }
    const nlohmann::json manifest = {
        {"schema", kManifestSchema},
        {"spec", to_json(db.spec)},
        {"plant_fingerprint", db.plant_fingerprint},
        {"seed", db.seed},
        {"fingerprint", db.fingerprint()},
        {"transients", entries},
        {"failures", failures},
    };
    std::ofstream out(dir / "manifest.json");
    if (!out) {
        throw IoError("cannot write manifest in '" + dir.string() + "'");
    }
    out << manifest.dump(2) << '\n';
}

Database read_database(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        throw IoError("no manifest.json in '" + dir.string() + "'");
    }
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (m.value("schema", "") != kManifestSchema) {
        throw ParseError("manifest schema is not " + std::string(kManifestSchema));
    }
    Database db;
    db.spec = spec_from_json(m.at("spec"));
    db.plant_fingerprint = m.at("plant_fingerprint").get<std::string>();
    db.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& e : m.at("transients")) {
        Transient t = read_transient_csv(dir / e.at("file").get<std::string>());
        t.scenario_id = e.at("id").get<std::string>();
        t.seed = e.at("seed").get<std::uint64_t>();
        IssueParams raw;
        for (const auto& [k, v] : e.at("issue").items()) {
            raw.emplace_back(k, v.get<double>());
        }
        t.issue_point = IssuePoint::from_params(raw).to_params();
        db.transients.push_back(std::move(t));
    }
    for (const auto& f : m.value("failures", nlohmann::json::array())) {
        db.failures.push_back(
            {f.at("index").get<std::size_t>(), f.at("id").get<std::string>(), f.at("message").get<std::string>()});
    }
    return db;
}

Split split_database(const std::vector<Transient>& transients, std::array<double, 3> fractions,
                     std::uint64_t seed)
{
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            throw TooFew("every split fraction must be positive");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidSpec("split fractions must sum to 1");
    }
    const std::size_t n = transients.size();
    const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw TooFew("split of " + std::to_string(n) + " transients leaves an empty part");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    // Fisher-Yates with an explicit draw so the split is portable across standard libraries.
    std::mt19937_64 gen(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
        std::swap(order[i], order[j]);
    }
    Split s;
    for (std::size_t k = 0; k < n; ++k) {
        const Transient& t = transients[order[k]];
        if (k < n_train) {
            s.train.push_back(t);
        }
        else if (k < n_train + n_val) {
            s.validation.push_back(t);
        }
        else {
            s.test.push_back(t);
        }
    }
    return s;
}

} // namespace twinctl::scenario
