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

#include <stdexcept>
#include <string>

namespace twinctl {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TWINCTL_DEFINE_ERROR(Name)              \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

// plant
TWINCTL_DEFINE_ERROR(NonConvergence);
TWINCTL_DEFINE_ERROR(NumericalBlowup);
TWINCTL_DEFINE_ERROR(InvalidParams);

// scenario / persistence
TWINCTL_DEFINE_ERROR(EmptySpace);
TWINCTL_DEFINE_ERROR(TooFew);
TWINCTL_DEFINE_ERROR(InvalidSpec);
TWINCTL_DEFINE_ERROR(GenerationFailed);
TWINCTL_DEFINE_ERROR(IoError);
TWINCTL_DEFINE_ERROR(ParseError);

// neural
TWINCTL_DEFINE_ERROR(DimensionMismatch);
TWINCTL_DEFINE_ERROR(Divergence);
TWINCTL_DEFINE_ERROR(ConstantFeature);

// digital twins
TWINCTL_DEFINE_ERROR(WindowTooShort);
TWINCTL_DEFINE_ERROR(MissingFeature);
TWINCTL_DEFINE_ERROR(ScheduleGap);
TWINCTL_DEFINE_ERROR(ModelLoadError);

// strategy / decision
TWINCTL_DEFINE_ERROR(InvalidEstimate);
TWINCTL_DEFINE_ERROR(NoCandidates);
TWINCTL_DEFINE_ERROR(WindowMismatch);
TWINCTL_DEFINE_ERROR(ZeroNormalizer);

// orchestrator
TWINCTL_DEFINE_ERROR(PhaseConflict);   // request not allowed in the current phase
TWINCTL_DEFINE_ERROR(InvalidDecision); // malformed or unknown candidate

// analytics
TWINCTL_DEFINE_ERROR(EmptyInput);
TWINCTL_DEFINE_ERROR(ZeroVariance);
TWINCTL_DEFINE_ERROR(DegenerateSamples);
TWINCTL_DEFINE_ERROR(GridTooCoarse);
TWINCTL_DEFINE_ERROR(ObjectiveFailures);

#undef TWINCTL_DEFINE_ERROR

} // namespace twinctl
