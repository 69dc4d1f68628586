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

#include "twinctl/common/error_report.hpp"

#include <algorithm>

#include "twinctl/common/error.hpp"

namespace twinctl {

namespace {

std::size_t find(const std::vector<std::string>& names, const std::string& name)
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw MissingFeature("no error entry for '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
}

} // namespace

double ErrorReport::rmse_of(const std::string& name) const
{
    return rmse.at(find(names, name));
}

double ErrorReport::mse_of(const std::string& name) const
{
    return mse.at(find(names, name));
}

nlohmann::json ErrorReport::to_json() const
{
    return {{"names", names}, {"mse", mse}, {"rmse", rmse}, {"points", points}};
}

ErrorReport ErrorReport::from_json(const nlohmann::json& j)
{
    ErrorReport r;
    r.names = j.at("names").get<std::vector<std::string>>();
    r.mse = j.at("mse").get<std::vector<double>>();
    r.rmse = j.at("rmse").get<std::vector<double>>();
    r.points = j.at("points").get<std::size_t>();
    if (r.mse.size() != r.names.size() || r.rmse.size() != r.names.size()) {
        throw ParseError("error report arrays differ in length");
    }
    return r;
}

} // namespace twinctl
