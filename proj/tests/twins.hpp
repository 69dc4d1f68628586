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

#include <memory>

#include "small_db.hpp"
#include "twinctl/orchestrator/session.hpp"

namespace twinctl::fixture {

/// Small but usable twins plus the availability table, trained once per process.
inline const orch::Assets& twins()
{
    static const orch::Assets assets = [] {
        const auto db = small_db(60, 11);
        const auto split = scenario::split_database(db.transients, {0.8, 0.1, 0.1}, 7);
        dtd::DiagnosisConfig dc;
        dc.train.hidden = 12;
        dc.train.epochs_max = 12;
        dc.train.batch_size = 50;
        dc.train.seed = 3;
        dtp::PrognosisConfig pc;
        pc.residual = true;
        pc.train.hidden = 12;
        pc.train.epochs_max = 25;
        pc.train.batch_size = 16;
        pc.train.seed = 4;
        orch::Assets a;
        a.dtd = std::make_shared<const dtd::DiagnosisModel>(dtd::train_dtd(split, dc, db.fingerprint()));
        a.dtp = std::make_shared<const dtp::PrognosisModel>(dtp::train_dtp(split, pc, db.fingerprint()));
        a.table = std::make_shared<const strategy::ReferenceTable>(strategy::build_reference_table(
            plant::PlantParams::nominal(), strategy::CandidateGrid::standard(), strategy::MalfunctionEstimate{},
            250.0));
        return a;
    }();
    return assets;
}

} // namespace twinctl::fixture
