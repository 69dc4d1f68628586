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

#include "twinctl/analytics/coverage.hpp"

#include <cmath>

#include "twinctl/analytics/density.hpp"
#include "twinctl/analytics/metrics.hpp"
#include "twinctl/common/error.hpp"

namespace twinctl::analytics {

namespace {

std::vector<double> pooled(const std::vector<Transient>& set, const std::string& feature)
{
    std::vector<double> out;
    for (const auto& tr : set) {
        const auto& col = tr.column(feature);
        out.insert(out.end(), col.begin(), col.end());
    }
    return out;
}

struct PairScore {
    double kl = 0.0;
    double h2 = 0.0;
};

// Both metrics from one pair of grid evaluations, with the refinement check.
PairScore score(const Kde& p, const Kde& q, std::size_t points)
{
    const Grid g = shared_grid(p, q, points);
    const Grid fine = g.refined();
    const auto pc = p.evaluate(g);
    const auto qc = q.evaluate(g);
    const auto pf = p.evaluate(fine);
    const auto qf = q.evaluate(fine);
    PairScore coarse{sym_kl_values(pc, qc, g.step()), hellinger_sq_values(pc, qc, g.step())};
    PairScore refined{sym_kl_values(pf, qf, fine.step()), hellinger_sq_values(pf, qf, fine.step())};
    if (std::abs(refined.kl - coarse.kl) > 0.01 * refined.kl + 1e-12 ||
        std::abs(refined.h2 - coarse.h2) > 0.01 * refined.h2 + 1e-12) {
        throw GridTooCoarse("coverage grid of " + std::to_string(points) + " points is too coarse");
    }
    return refined;
}

std::optional<double> pcc_or_none(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() < 2) {
        return std::nullopt;
    }
    try {
        return pearson(x, y);
    }
    catch (const ZeroVariance&) {
        return std::nullopt;
    }
}

} // namespace

CoverageReport coverage_report(const std::vector<Transient>& reference, const std::vector<CoverageTarget>& targets,
                               const std::vector<std::string>& features, std::size_t grid_points)
{
    if (reference.empty() || features.empty()) {
        throw EmptyInput("coverage needs a reference database and at least one feature");
    }
    CoverageReport report;
    report.features = features;
    std::vector<Kde> ref;
    for (const auto& f : features) {
        ref.push_back(Kde::fit(pooled(reference, f)));
    }
    for (const auto& t : targets) {
        if (t.transients == nullptr || t.transients->empty()) {
            throw EmptyInput("coverage target '" + t.name + "' is empty");
        }
        CoverageRow row;
        row.name = t.name;
        row.model_error = t.model_error;
        for (std::size_t k = 0; k < features.size(); ++k) {
            const Kde q = Kde::fit(pooled(*t.transients, features[k]));
            const PairScore s = score(ref[k], q, grid_points);
            row.sym_kl.push_back(s.kl);
            row.hellinger_sq.push_back(s.h2);
            row.sym_kl_mean += s.kl;
            row.hellinger_sq_mean += s.h2;
        }
        row.sym_kl_mean /= static_cast<double>(features.size());
        row.hellinger_sq_mean /= static_cast<double>(features.size());
        report.rows.push_back(std::move(row));
    }
    std::vector<double> kl;
    std::vector<double> h2;
    std::vector<double> err;
    for (const auto& r : report.rows) {
        if (r.model_error) {
            kl.push_back(r.sym_kl_mean);
            h2.push_back(r.hellinger_sq_mean);
            err.push_back(*r.model_error);
        }
    }
    report.pcc_sym_kl = pcc_or_none(kl, err);
    report.pcc_hellinger_sq = pcc_or_none(h2, err);
    return report;
}

CsvTable CoverageReport::to_csv() const
{
    CsvTable t;
    t.header = {"target", "feature", "sym_kl", "hellinger_sq", "model_error"};
    for (const auto& r : rows) {
        const std::string err = r.model_error ? format_double(*r.model_error) : "";
        for (std::size_t k = 0; k < features.size(); ++k) {
            t.add_row({r.name, features[k], format_double(r.sym_kl[k]), format_double(r.hellinger_sq[k]), err});
        }
        t.add_row({r.name, "mean", format_double(r.sym_kl_mean), format_double(r.hellinger_sq_mean), err});
    }
    return t;
}

} // namespace twinctl::analytics
