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

// Acceptance run: one PASS/FAIL line per headline criterion. Tolerances are
// pinned below and never relaxed at run time. Builds its own ~1000-transient
// database and trains both twins from the shipped configs.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "twinctl/analytics/coverage.hpp"
#include "twinctl/analytics/density.hpp"
#include "twinctl/analytics/metrics.hpp"
#include "twinctl/common/csv.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/decision/engine.hpp"
#include "twinctl/diagnosis/diagnosis.hpp"
#include "twinctl/nn/train.hpp"
#include "twinctl/orchestrator/campaign.hpp"
#include "twinctl/plant/simulator.hpp"
#include "twinctl/prognosis/prognosis.hpp"
#include "twinctl/scenario/database.hpp"

using namespace twinctl;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double nominal_rel = 0.005;        // steady state vs nominal point
constexpr double energy_rel = 0.01;          // heat transported vs power
constexpr double rk4_drift = 1e-5;           // halving-dt endpoint change
constexpr double kl_rel = 0.02;              // sym KL vs 1.0, Hellinger² vs 1 − e^(−1/8)
constexpr double exact = 1e-10;              // hand examples, identical-database divergence
constexpr double grad_rel = 1e-4;
constexpr double xor_mse = 0.01;
constexpr double pfcl_gate = 0.05 * 605.8;   // 30.29 °C
constexpr double torque_gate = 0.05 * 636.57; // 31.83 N·m
constexpr double history_ratio = 5.0;
constexpr double availability = 685.0;
constexpr double zeta_limit = 0.10;
constexpr double minutes_calibration = 1.0;
constexpr double minutes_analytics = 1.0;
constexpr double minutes_neural = 5.0;
constexpr double minutes_training = 45.0;
constexpr double minutes_campaign = 30.0;
constexpr int region_draws = 1'000'000;
} // namespace tol

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

double minutes_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count() / 60.0; }

void report(const std::string& name, const std::function<Outcome()>& fn)
{
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++g_failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << " | " << std::fixed
              << std::setprecision(1) << minutes_since(t0) * 60.0 << " s" << std::defaultfloat << std::endl;
}

std::string fmt(double v, int p = 4)
{
    std::ostringstream s;
    s << std::setprecision(p) << v;
    return s.str();
}

nlohmann::json read_json(const std::string& name)
{
    std::ifstream in(std::string(TWINCTL_CONFIG_DIR) + "/" + name);
    if (!in) throw IoError("missing config " + name);
    return nlohmann::json::parse(in);
}

scenario::Database make_db(const std::string& config, std::uint64_t seed)
{
    return scenario::generate_database(scenario::spec_from_json(read_json(config)), plant::PlantParams::nominal(), seed);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome calibration()
{
    const auto t0 = Clock::now();
    const auto p = plant::PlantParams::nominal();
    const auto s = plant::steady_state_init(p);
    const double worst = std::max({rel(s.power, 6.0e7), rel(s.core_flow, 469.8), rel(s.fuel_temp, 605.8),
                                   rel(s.upper_plenum_temp, 443.1), rel(s.hp_plenum_temp, 344.4), rel(s.clad_temp, 487.9)});
    const double inlet = p.hp_inlet_fraction * s.hp_plenum_temp + (1.0 - p.hp_inlet_fraction) * s.lp_plenum_temp;
    const double energy = rel(s.core_flow * p.coolant_heat_capacity * (s.core_outlet_temp - inlet), s.power);

    const auto loss = PiecewiseLinear::ramp(10.0, p.nominal_torque, 60.0, 0.5 * p.nominal_torque);
    const auto coarse = plant::run_transient(p, loss, std::nullopt, 250.0, 1.0);
    auto fine_p = p;
    fine_p.integrator_dt = p.integrator_dt / 2.0;
    const auto fine = plant::run_transient(fine_p, loss, std::nullopt, 250.0, 1.0);
    double drift = 0.0;
    for (auto n : var::state_columns) {
        const double a = coarse.column(n).back();
        const double b = fine.column(n).back();
        drift = std::max(drift, std::abs(a - b) / std::max(std::abs(b), 1.0));
    }
    const double m = minutes_since(t0);
    return {worst < tol::nominal_rel && energy < tol::energy_rel && drift < tol::rk4_drift &&
                m < tol::minutes_calibration,
            "nominal dev " + fmt(worst) + " (< 0.005), energy " + fmt(energy) + " (< 0.01), rk4 drift " + fmt(drift) +
                " (< 1e-5)"};
}

Outcome closed_form()
{
    const auto t0 = Clock::now();
    auto normal = [](double mu) {
        return [mu](double x) { return std::exp(-0.5 * (x - mu) * (x - mu)) / std::sqrt(2.0 * std::numbers::pi); };
    };
    const analytics::Grid g{-12.0, 13.0, 4097};
    const double kl = analytics::sym_kl(normal(0.0), normal(1.0), g);
    const double h2 = analytics::hellinger_sq(normal(0.0), normal(1.0), g);
    const double h2_exact = 1.0 - std::exp(-0.125);
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4}, c{2, 4, 6, 8};
    const double pcc = analytics::pearson(a, b);    // 0.8 by hand
    const double pcc2 = analytics::pearson(a, c);   // 1
    const double r = analytics::rmse(a, b);         // sqrt(2/4)
    const double hand = std::max({std::abs(pcc - 0.8), std::abs(pcc2 - 1.0), std::abs(r - std::sqrt(0.5))});
    const double m = minutes_since(t0);
    return {rel(kl, 1.0) < tol::kl_rel && rel(h2, h2_exact) < tol::kl_rel && hand < tol::exact &&
                m < tol::minutes_analytics,
            "sym_kl " + fmt(kl, 6) + " (1.0 ± 2%), hellinger_sq " + fmt(h2, 6) + " (" + fmt(h2_exact, 6) +
                " ± 2%), hand-example error " + fmt(hand, 3)};
}

Outcome neural()
{
    const auto t0 = Clock::now();
    std::normal_distribution<double> nd;
    double fnn_worst = 0.0, gru_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 gen(seed + 1000);
        nn::FeedforwardNet f({3, 6, 5, 2}, seed);
        nn::DenseDataset d;
        d.x.resize(3, 7);
        d.y.resize(2, 7);
        for (Eigen::Index i = 0; i < d.x.size(); ++i) d.x.data()[i] = nd(gen);
        for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y.data()[i] = nd(gen);
        fnn_worst = std::max(fnn_worst, nn::grad_check(f, d, 1e-5).max_rel_error);

        nn::RecurrentNet g(3, 4, 2, 2, seed);
        nn::SequenceDataset s;
        for (int k = 0; k < 3; ++k) {
            Eigen::MatrixXd x(3, 5), y(2, 5);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
            for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = nd(gen);
            s.inputs.push_back(x);
            s.targets.push_back(y);
            s.masks.push_back(Eigen::RowVectorXd::Ones(5));
        }
        gru_worst = std::max(gru_worst, nn::grad_check(g, s, 1e-5).max_rel_error);
    }
    nn::FeedforwardNet net({2, 8, 8, 1}, 4);
    nn::DenseDataset x;
    x.x.resize(2, 4);
    x.y.resize(1, 4);
    x.x << 0, 0, 1, 1, 0, 1, 0, 1;
    x.y << -1, 1, 1, -1;
    nn::TrainConfig c;
    c.batch_size = 4;
    c.learning_rate = 0.05;
    c.epochs_max = 5000;
    c.early_stop_patience = 5000;
    c.validation_patience = 5000;
    (void)nn::train(net, x, x, x, c);
    const double xor_mse = nn::evaluate_mse(net, x);
    const double m = minutes_since(t0);
    return {fnn_worst < tol::grad_rel && gru_worst < tol::grad_rel && xor_mse < tol::xor_mse && m < tol::minutes_neural,
            "fnn grad rel " + fmt(fnn_worst, 3) + ", gru grad rel " + fmt(gru_worst, 3) + " (< 1e-4, 20 seeds), xor mse " +
                fmt(xor_mse, 3) + " (< 0.01)"};
}

struct Trained {
    scenario::Database db;
    scenario::Split split;
    std::shared_ptr<const dtd::DiagnosisModel> dtd;
    std::shared_ptr<const dtp::PrognosisModel> dtp;
    double minutes = 0.0;
};

Trained train_twins()
{
    const auto t0 = Clock::now();
    Trained t;
    t.db = make_db("db_train.json", 11);
    const auto dc = dtd::diagnosis_config_from_json(read_json("dtd.json"));
    const auto pc = dtp::prognosis_config_from_json(read_json("dtp.json"));
    t.split = scenario::split_database(t.db.transients, pc.split, pc.split_seed);
    const auto fp = t.db.fingerprint();
    t.dtd = std::make_shared<const dtd::DiagnosisModel>(dtd::train_dtd(t.db, dc));
    t.dtp = std::make_shared<const dtp::PrognosisModel>(dtp::train_dtp(t.split, pc, fp));
    t.minutes = minutes_since(t0);
    return t;
}

Outcome gates(const Trained& t)
{
    const auto t0 = Clock::now();
    const std::string pf(var::pfcl_temp);
    const double dtd_rmse = t.dtd->evaluation.test.rmse_of(pf);
    const double dtp_rmse = t.dtp->evaluation.closed_loop_test.rmse_of(pf);

    // pump-1 curve: measured torque up to t_rcmd, then the malfunction estimate of each held-out transient
    constexpr double t_rcmd = 38.0;
    double se = 0.0;
    std::size_t n = 0;
    for (const auto& tr : t.split.test) {
        const auto ip = scenario::IssuePoint::from_params(tr.issue_point);
        const strategy::MalfunctionEstimate est{ip.malfunction_start, ip.malfunction_end,
                                                636.57 * (1.0 - ip.malfunction_magnitude / 100.0)};
        const auto& tau = tr.column(var::psp1_torque);
        std::vector<double> ts, vs;
        for (std::size_t i = 0; i < tr.size() && tr.time[i] <= t_rcmd + 1e-9; ++i) {
            ts.push_back(tr.time[i]);
            vs.push_back(tau[i]);
        }
        const auto curve = strategy::predict_psp1_curve(ts, vs, est);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double d = curve(tr.time[i]) - tau[i];
            se += d * d;
            ++n;
        }
    }
    const double curve_rmse = std::sqrt(se / static_cast<double>(n));
    const double m = t.minutes + minutes_since(t0);
    return {dtd_rmse <= tol::pfcl_gate && dtp_rmse <= tol::pfcl_gate && curve_rmse <= tol::torque_gate &&
                m < tol::minutes_training,
            "DT-D test PFCL rmse " + fmt(dtd_rmse) + " C, DT-P closed-loop PFCL rmse " + fmt(dtp_rmse) +
                " C (<= 30.29), pump-1 curve rmse " + fmt(curve_rmse) + " N·m (<= 31.83), " +
                std::to_string(t.db.transients.size()) + " transients, train+eval " + fmt(m, 3) + " min (< 45)"};
}

Outcome history(const Trained& t)
{
    const auto pts = dtp::history_sensitivity(*t.dtp, t.split.test, {0.0, 5.0}, t.dtp->config.eval_t_r);
    const std::string pf(var::pfcl_temp);
    const double m0 = pts[0].report.mse_of(pf);
    const double m5 = pts[1].report.mse_of(pf);
    return {m0 > tol::history_ratio * m5,
            "PFCL mse with 0 s history " + fmt(m0) + ", with 5 s " + fmt(m5) + ", ratio " + fmt(m0 / m5) +
                " (needs > 5)"};
}

Outcome coverage(const Trained& t)
{
    const auto interp = make_db("db_interp.json", 12);
    const auto fast = make_db("db_extrap_fast.json", 13);
    const auto boost = make_db("db_extrap_boost.json", 14);
    std::vector<std::string> features;
    for (auto n : var::state_columns) features.emplace_back(n);
    const auto rep = analytics::coverage_report(
        t.db.transients,
        {{"interp", &interp.transients, std::nullopt}, {"fast", &fast.transients, std::nullopt},
         {"boost", &boost.transients, std::nullopt}, {"self", &t.db.transients, std::nullopt}},
        features);
    const auto& r = rep.rows;
    const bool order = r[0].sym_kl_mean < r[1].sym_kl_mean && r[0].sym_kl_mean < r[2].sym_kl_mean &&
                       r[0].hellinger_sq_mean < r[1].hellinger_sq_mean && r[0].hellinger_sq_mean < r[2].hellinger_sq_mean;
    const bool self = r[3].sym_kl_mean < tol::exact && r[3].hellinger_sq_mean < tol::exact;
    std::string d = "sym_kl interp/fast/boost " + fmt(r[0].sym_kl_mean) + "/" + fmt(r[1].sym_kl_mean) + "/" +
                    fmt(r[2].sym_kl_mean) + ", hellinger_sq " + fmt(r[0].hellinger_sq_mean) + "/" +
                    fmt(r[1].hellinger_sq_mean) + "/" + fmt(r[2].hellinger_sq_mean) + ", self " +
                    fmt(r[3].sym_kl_mean, 3) + "/" + fmt(r[3].hellinger_sq_mean, 3);
    return {order && self, d};
}

Outcome decision_exactness()
{
    const decision::RewardSpec s;
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> pf(500.0, 720.0), rv(-0.7, 0.7);
    std::size_t mismatches = 0;
    auto oracle_pfcl = [&](double v) {
        if (v > 600.0 && v <= 615.0) return decision::Region::Best;
        if ((v > 615.0 && v <= 685.0) || (v > 550.0 && v <= 600.0)) return decision::Region::Good;
        return decision::Region::Bad;
    };
    auto oracle_rel = [](double v, double best, double good) {
        v = std::abs(v);
        return v <= best ? decision::Region::Best : v <= good ? decision::Region::Good : decision::Region::Bad;
    };
    for (int i = 0; i < tol::region_draws; ++i) {
        // a third of the draws land exactly on a boundary
        double p = pf(gen), w = rv(gen), q = rv(gen);
        if (i % 3 == 0) {
            static const double edges[] = {550.0, 600.0, 615.0, 685.0};
            static const double redges[] = {0.10, 0.20, 0.25, 0.50, -0.10, -0.20, -0.25, -0.50};
            p = edges[i % 4];
            w = redges[i % 8];
            q = redges[(i / 8) % 8];
        }
        mismatches += decision::classify_region(decision::Attribute::Pfcl, p, s) != oracle_pfcl(p);
        mismatches += decision::classify_region(decision::Attribute::Power, w, s) != oracle_rel(w, 0.10, 0.20);
        mismatches += decision::classify_region(decision::Attribute::Torque, q, s) != oracle_rel(q, 0.25, 0.50);
    }

    auto flat = [](double power_offset) {
        Transient t;
        for (int k = 0; k <= 250; ++k) t.time.push_back(k);
        t.add_column(std::string(var::pfcl_temp), std::vector<double>(251, 605.8));
        t.add_column(std::string(var::core_power), std::vector<double>(251, 6.0e7 + power_offset));
        t.add_column(std::string(var::psp2_torque), std::vector<double>(251, 636.57));
        return t;
    };
    const double total = decision::accumulate_rewards(flat(0.0), s, 1.0).total;
    const auto zr = decision::check_discrepancy(flat(0.36e6), flat(0.0), 38.0, 100.0);
    bool monotone = true;
    for (double a = 0.0; a <= 0.3; a += 0.01) {
        for (double b = 0.0; b <= 0.3; b += 0.01) {
            const bool sc = decision::discrepancy_verdict(a, b, 0.1) == decision::Verdict::Scram;
            const bool up = decision::discrepancy_verdict(a + 0.01, b + 0.01, 0.1) == decision::Verdict::Scram;
            if (sc && !up) monotone = false;
        }
    }
    return {mismatches == 0 && total == 1250.0 && std::abs(zr.zeta_power - 0.006) < tol::exact && monotone,
            std::to_string(mismatches) + " region mismatches in " + std::to_string(tol::region_draws) +
                " draws, all-Best reward " + fmt(total, 10) + " (== 1250), zeta 0.36/60 MW = " + fmt(zr.zeta_power, 6) +
                (monotone ? ", verdict monotone" : ", verdict NOT monotone")};
}

Outcome end_to_end(const Trained& t)
{
    orch::Assets a;
    a.dtd = t.dtd;
    a.dtp = t.dtp;
    a.table = std::make_shared<const strategy::ReferenceTable>(strategy::build_reference_table(
        plant::PlantParams::nominal(), strategy::CandidateGrid::standard(), strategy::MalfunctionEstimate{}, 250.0));

    orch::SessionConfig c;
    c.malfunction = {50.0, 20.0, 70.0};
    const auto r = orch::run_workflow(c, a, orch::auto_accept());
    const auto& pf = r.realized.column(var::pfcl_temp);
    const double peak = *std::max_element(pf.begin(), pf.end());
    double zeta = 0.0;
    for (const auto& rep : r.reports) zeta = std::max({zeta, rep.zeta_pfcl, rep.zeta_power});
    const bool single = r.phase == orch::Phase::Completed && peak < tol::availability && r.reports.size() == 2 &&
                        zeta < tol::zeta_limit;

    const auto t0 = Clock::now();
    const orch::CampaignSpec spec;
    const auto camp = orch::run_campaign(spec, a);
    const double minutes = minutes_since(t0);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < camp.cases.size(); ++i) {
        if (camp.cases[i].zeta_pfcl > camp.cases[worst].zeta_pfcl) worst = i;
    }
    const orch::CaseResult* hard = nullptr;
    for (const auto& cr : camp.cases) {
        if (cr.scenario.magnitude == 100.0 && std::abs(cr.scenario.speed() - 10.0) < 1e-9) hard = &cr;
    }
    bool escalation = true; // any factor over the limit must end scrammed
    std::size_t scrams = 0;
    for (const auto& cr : camp.cases) {
        scrams += cr.phase == orch::Phase::Scrammed;
        if (cr.zeta_max > tol::zeta_limit && cr.phase != orch::Phase::Scrammed) escalation = false;
    }
    const bool hard_max = hard && hard->zeta_pfcl >= camp.cases[worst].zeta_pfcl;
    const bool hard_scram = hard && (hard->zeta_max <= tol::zeta_limit || hard->phase == orch::Phase::Scrammed);
    std::string d = "50% case " + std::string(orch::to_string(r.phase)) + ", peak PFCL " + fmt(peak) +
                    " C, max zeta " + fmt(zeta, 3) + "; campaign " + std::to_string(camp.cases.size()) + " cases, " +
                    std::to_string(camp.failures()) + " errors, " + std::to_string(scrams) + " scrammed, " +
                    fmt(minutes, 3) + " min; max zeta_pfcl " + fmt(camp.cases[worst].zeta_pfcl, 3) + " at " +
                    fmt(camp.cases[worst].scenario.magnitude) + "% @ " + fmt(camp.cases[worst].scenario.speed()) +
                    " %/s";
    if (hard) d += "; 100% @ 10 %/s: zeta_pfcl " + fmt(hard->zeta_pfcl, 3) + ", " + orch::to_string(hard->phase);
    return {single && camp.cases.size() == 46 && camp.failures() == 0 && hard_max && hard_scram && escalation &&
                minutes < tol::minutes_campaign,
            d};
}

Outcome determinism(const Trained& t)
{
    std::vector<std::string> broken;
    // database: parallel twice and the serial reference
    const auto spec = scenario::spec_from_json(read_json("db_interp.json"));
    const auto p = plant::PlantParams::nominal();
    const auto a = scenario::generate_database(spec, p, 21);
    const auto b = scenario::generate_database(spec, p, 21);
    const auto c = scenario::generate_database_serial(spec, p, 21);
    auto same_db = [](const scenario::Database& x, const scenario::Database& y) {
        if (x.transients.size() != y.transients.size()) return false;
        for (std::size_t i = 0; i < x.transients.size(); ++i) {
            if (x.transients[i].columns != y.transients[i].columns) return false;
        }
        return x.fingerprint() == y.fingerprint();
    };
    if (!same_db(a, b) || !same_db(a, c)) broken.push_back("database");

    // both twins on a slice of the training split, trained twice
    scenario::Split small{{t.split.train.begin(), t.split.train.begin() + 40},
                          {t.split.validation.begin(), t.split.validation.begin() + 8},
                          {t.split.test.begin(), t.split.test.begin() + 8}};
    auto dc = dtd::diagnosis_config_from_json(read_json("dtd.json"));
    dc.train.epochs_max = 3;
    auto pc = dtp::prognosis_config_from_json(read_json("dtp.json"));
    pc.train.epochs_max = 5;
    if (dtd::train_dtd(small, dc, "x").to_json().dump() != dtd::train_dtd(small, dc, "x").to_json().dump()) {
        broken.push_back("dtd training");
    }
    if (dtp::train_dtp(small, pc, "x").to_json().dump() != dtp::train_dtp(small, pc, "x").to_json().dump()) {
        broken.push_back("dtp training");
    }

    // multistep prediction, parallel vs serial
    const auto hist = dtp::HistoryBuffer::from_transient(t.split.test.front(), t.dtp->config.states,
                                                         t.dtp->config.actions, 38.0, 20.0);
    std::vector<strategy::TorqueSchedule> sch;
    for (const auto& cand : strategy::CandidateGrid::standard().candidates()) {
        sch.push_back(strategy::make_schedule(PiecewiseLinear::ramp(20.0, 636.57, 70.0, 494.23),
                                              strategy::predict_psp2_curve(cand), 38.0, 250.0, 1.0));
    }
    const auto pp = dtp::predict_multistep(*t.dtp, hist, sch, 212.0);
    const auto ps = dtp::predict_multistep_serial(*t.dtp, hist, sch, 212.0);
    for (std::size_t i = 0; i < pp.size(); ++i) {
        if (pp[i].columns != ps[i].columns) {
            broken.push_back("prediction");
            break;
        }
    }

    // sessions with sensor noise and a small campaign, repeated
    orch::Assets as;
    as.dtd = t.dtd;
    as.dtp = t.dtp;
    as.table = std::make_shared<const strategy::ReferenceTable>(strategy::build_reference_table(
        p, strategy::CandidateGrid::standard(), strategy::MalfunctionEstimate{}, 250.0));
    orch::SessionConfig sc;
    sc.sensor_noise = 0.005;
    sc.seed = 33;
    if (orch::run_workflow(sc, as, orch::auto_accept()).to_json().dump() !=
        orch::run_workflow(sc, as, orch::auto_accept()).to_json().dump()) {
        broken.push_back("session");
    }
    orch::CampaignSpec cs;
    cs.magnitudes = {40.0, 90.0};
    cs.speeds = {1.0, 10.0};
    if (orch::run_campaign(cs, as, true).to_json().dump() != orch::run_campaign(cs, as, false).to_json().dump()) {
        broken.push_back("campaign");
    }
    std::string d = "database, dtd/dtp training, multistep prediction, noisy session, campaign";
    if (!broken.empty()) {
        d = "differs:";
        for (const auto& s : broken) d += " " + s;
    } else {
        d += " bit-identical on repeat";
    }
    return {broken.empty(), d};
}

} // namespace

int main()
{
    std::cout << "acceptance: " << TWINCTL_CONFIG_DIR << std::endl;
    report("surrogate calibration", calibration);
    report("closed-form analytics", closed_form);
    report("neural correctness", neural);

    const auto t0 = Clock::now();
    std::optional<Trained> trained;
    try {
        trained = train_twins();
        std::cout << "     (database + training " << fmt(minutes_since(t0), 3) << " min)" << std::endl;
    } catch (const std::exception& e) {
        std::cout << "     (training threw: " << e.what() << ")" << std::endl;
    }
    auto need = [&](auto fn) {
        return [&, fn]() -> Outcome {
            if (!trained) return {false, "no trained twins"};
            return fn(*trained);
        };
    };
    report("accuracy gates (DT-D, DT-P, pump-1 curve)", need(gates));
    report("history-length ordering", need(history));
    report("coverage ordering", need(coverage));
    report("decision engine exactness", decision_exactness);
    report("end-to-end session and campaign", need(end_to_end));
    report("determinism", need(determinism));
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
    return g_failures == 0 ? 0 : 1;
}
