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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twinctl/common/transient.hpp"
#include "twinctl/plant/params.hpp"
#include "twinctl/scenario/issue_space.hpp"

namespace twinctl::scenario {

struct GenerationFailure {
    std::size_t index = 0;
    std::string scenario_id;
    std::string message;
};

struct Database {
    IssueSpaceSpec spec;
    std::vector<Transient> transients;
    std::string plant_fingerprint;
    std::uint64_t seed = 0;
    std::vector<GenerationFailure> failures;

    /// Stable identifier of the database contents (spec, plant, seed, ids).
    [[nodiscard]] std::string fingerprint() const;
};

/// Runs one transient per issue point. `jobs` = 0 uses the OpenMP default;
/// the result does not depend on `jobs`. Failed points are recorded and
/// skipped; more than 1% failures throws GenerationFailed.
[[nodiscard]] Database generate_database(const IssueSpaceSpec& spec, const plant::PlantParams& params,
                                         std::uint64_t seed, int jobs = 0);

/// Single-threaded reference implementation of generate_database.
[[nodiscard]] Database generate_database_serial(const IssueSpaceSpec& spec,
                                                const plant::PlantParams& params, std::uint64_t seed);

/// One CSV per transient plus manifest.json. The manifest is written last.
void write_database(const std::filesystem::path& dir, const Database& db);
[[nodiscard]] Database read_database(const std::filesystem::path& dir);

struct Split {
    std::vector<Transient> train;
    std::vector<Transient> validation;
    std::vector<Transient> test;
};

/// Partition whole transients. Sizes are round(f·n) for train and
/// validation, the remainder for test. Throws TooFew if any part is empty.
[[nodiscard]] Split split_database(const std::vector<Transient>& transients,
                                   std::array<double, 3> fractions, std::uint64_t seed);

} // namespace twinctl::scenario
