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

// Command-line front end. Every subcommand reads JSON configs and writes
// CSV/JSON artifacts; see README for the schemas.

#include <chrono>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "twinctl/analytics/coverage.hpp"
#include "twinctl/analytics/tuning.hpp"
#include "twinctl/common/csv.hpp"
#include "twinctl/common/error.hpp"
#include "twinctl/common/variables.hpp"
#include "twinctl/diagnosis/diagnosis.hpp"
#include "twinctl/orchestrator/campaign.hpp"
#include "twinctl/orchestrator/server.hpp"
#include "twinctl/orchestrator/session.hpp"
#include "twinctl/prognosis/prognosis.hpp"
#include "twinctl/scenario/database.hpp"

using namespace twinctl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    try {
        return json::parse(in, nullptr, true, true); // comments allowed
    } catch (const json::exception& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

void write_json(const fs::path& p, const json& j)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << j.dump(2) << "\n";
}

plant::PlantParams load_plant(const std::string& path)
{
    return path.empty() ? plant::PlantParams::nominal() : plant::params_from_json(read_json(path));
}

std::function<void(const nn::EpochRecord&)> epoch_logger(bool quiet)
{
    if (quiet) return {};
    return [](const nn::EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << "  train " << e.train_mse << "  val " << e.validation_mse << "  test "
                  << e.test_mse << "  lr " << e.learning_rate << "\n";
    };
}

json report_json(const ErrorReport& r) { return r.to_json(); }

void print_report(const std::string& label, const ErrorReport& r)
{
    std::cout << label << " (" << r.points << " points)\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        std::cout << "  " << r.names[i] << "  rmse " << r.rmse[i] << "  mse " << r.mse[i] << "\n";
    }
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_double(item));
    }
    return out;
}

// Train-and-score closure for the tuning commands. Scored on the validation
// split so the test split stays untouched by the search.
analytics::Objective twin_objective(const std::string& twin, const scenario::Database& db, const json& base_config)
{
    if (twin == "dtd") {
        const auto cfg = dtd::diagnosis_config_from_json(base_config);
        auto split = std::make_shared<scenario::Split>(scenario::split_database(db.transients, cfg.split, cfg.split_seed));
        const auto fp = db.fingerprint();
        return [cfg, split, fp](const analytics::ParamPoint& p) {
            auto c = cfg;
            nn::apply_hyperparameters(c.train, p);
            const auto m = dtd::train_dtd(*split, c, fp);
            return m.evaluation.validation.mse_of(std::string(var::pfcl_temp));
        };
    }
    if (twin == "dtp") {
        const auto cfg = dtp::prognosis_config_from_json(base_config);
        auto split = std::make_shared<scenario::Split>(scenario::split_database(db.transients, cfg.split, cfg.split_seed));
        const auto fp = db.fingerprint();
        return [cfg, split, fp](const analytics::ParamPoint& p) {
            auto c = cfg;
            nn::apply_hyperparameters(c.train, p);
            const auto m = dtp::train_dtp(*split, c, fp);
            return m.evaluation.one_step_validation.mse_of(std::string(var::pfcl_temp));
        };
    }
    throw InvalidSpec("--twin must be dtd or dtp");
}

analytics::ParamPoint defaults_for(const std::string& twin, const json& base_config,
                                   const std::vector<analytics::ParamRange>& space)
{
    const nn::TrainConfig t = twin == "dtd" ? dtd::diagnosis_config_from_json(base_config).train
                                            : dtp::prognosis_config_from_json(base_config).train;
    const json tj = nn::to_json(t);
    analytics::ParamPoint p;
    for (const auto& r : space) {
        if (!tj.contains(r.name) || !tj[r.name].is_number()) throw InvalidSpec("unknown hyperparameter '" + r.name + "'");
        p[r.name] = tj[r.name].get<double>();
    }
    return p;
}

std::atomic<bool> g_stop{false};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Digital-twin supervisory control for a pool-type fast reactor surrogate"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress per-epoch progress");

    // datagen
    auto* datagen = app.add_subcommand("datagen", "Simulate a transient database over an issue space");
    std::string dg_spec, dg_out, dg_plant;
    std::uint64_t dg_seed = 1;
    int dg_jobs = 0;
    datagen->add_option("--spec", dg_spec, "Issue-space JSON")->required()->check(CLI::ExistingFile);
    datagen->add_option("--out", dg_out, "Output directory")->required();
    datagen->add_option("--seed", dg_seed, "Sampling seed");
    datagen->add_option("--plant", dg_plant, "Plant parameter JSON (default: nominal)");
    datagen->add_option("--jobs", dg_jobs, "Worker threads, 0 = OpenMP default");

    // train-dtd / train-dtp
    std::string tr_db, tr_config, tr_out;
    auto* train_dtd = app.add_subcommand("train-dtd", "Train the diagnosis twin");
    auto* train_dtp = app.add_subcommand("train-dtp", "Train the prognosis twin");
    for (auto* sc : {train_dtd, train_dtp}) {
        sc->add_option("--db", tr_db, "Database directory")->required()->check(CLI::ExistingDirectory);
        sc->add_option("--config", tr_config, "Twin config JSON (default: built-in)");
        sc->add_option("--out", tr_out, "Model file")->required();
    }

    // eval-dtd
    auto* eval_dtd = app.add_subcommand("eval-dtd", "Score a diagnosis twin on a database");
    std::string ev_model, ev_db, ev_out;
    double ev_noise = -1.0;
    std::uint64_t ev_seed = 1;
    eval_dtd->add_option("--model", ev_model)->required()->check(CLI::ExistingFile);
    eval_dtd->add_option("--db", ev_db)->required()->check(CLI::ExistingDirectory);
    eval_dtd->add_option("--noise-study", ev_noise, "Per-input noise level c for the noise study");
    eval_dtd->add_option("--seed", ev_seed, "Noise seed");
    eval_dtd->add_option("--out", ev_out, "Report JSON");

    // eval-dtp
    auto* eval_dtp = app.add_subcommand("eval-dtp", "Score a prognosis twin on a database");
    double ep_tr = -1.0, ep_hist = -1.0;
    std::string ep_lengths;
    eval_dtp->add_option("--model", ev_model)->required()->check(CLI::ExistingFile);
    eval_dtp->add_option("--db", ev_db)->required()->check(CLI::ExistingDirectory);
    eval_dtp->add_option("--t-r", ep_tr, "Prediction start (default: model config)");
    eval_dtp->add_option("--history", ep_hist, "History length in s (default: model config)");
    eval_dtp->add_option("--history-lengths", ep_lengths, "Comma list for the history study, e.g. 0,5,10,20");
    eval_dtp->add_option("--out", ev_out, "Report JSON");

    // coverage
    auto* coverage = app.add_subcommand("coverage", "Distribution divergence of target databases vs a reference");
    std::string cv_ref, cv_out, cv_model;
    std::vector<std::string> cv_targets, cv_features;
    std::size_t cv_grid = 1025;
    coverage->add_option("--reference", cv_ref, "Reference (training) database")->required()->check(CLI::ExistingDirectory);
    coverage->add_option("--target", cv_targets, "name=dir, repeatable")->required();
    coverage->add_option("--features", cv_features, "Columns to compare (default: all state variables)");
    coverage->add_option("--dtd-model", cv_model, "Pair each target with this twin's PFCL RMSE");
    coverage->add_option("--grid", cv_grid, "KDE grid points");
    coverage->add_option("--out", cv_out, "CSV report");

    // sensitivity / hyperopt
    std::string tu_twin = "dtd", tu_db, tu_config, tu_space, tu_out;
    std::uint64_t tu_seed = 1;
    int tu_n = 10, tu_jobs = 1, tu_startup = 20;
    auto* sensitivity = app.add_subcommand("sensitivity", "One-at-a-time hyperparameter scan");
    auto* hyperopt = app.add_subcommand("hyperopt", "Sequential model-based hyperparameter search");
    for (auto* sc : {sensitivity, hyperopt}) {
        sc->add_option("--twin", tu_twin, "dtd or dtp")->check(CLI::IsMember({"dtd", "dtp"}));
        sc->add_option("--db", tu_db)->required()->check(CLI::ExistingDirectory);
        sc->add_option("--config", tu_config, "Base twin config JSON");
        sc->add_option("--space", tu_space, "Parameter ranges JSON")->required()->check(CLI::ExistingFile);
        sc->add_option("--seed", tu_seed);
        sc->add_option("--out", tu_out, "CSV report");
    }
    sensitivity->add_option("--n", tu_n, "Samples per parameter");
    sensitivity->add_option("--jobs", tu_jobs, "Concurrent objective evaluations");
    hyperopt->add_option("--trials", tu_n, "Trial budget");
    hyperopt->add_option("--startup", tu_startup, "Random trials before the Parzen model");

    // demo / campaign / serve
    std::string se_config, se_out;
    auto* demo = app.add_subcommand("demo", "One auto-accept session with CSV and plot-data export");
    demo->add_option("--session", se_config, "Session config JSON")->required()->check(CLI::ExistingFile);
    demo->add_option("--out", se_out, "Output directory")->required();
    auto* campaign = app.add_subcommand("campaign", "Batch of auto-accept sessions over speed x magnitude");
    bool cp_serial = false;
    campaign->add_option("--spec", se_config, "Campaign JSON")->required()->check(CLI::ExistingFile);
    campaign->add_option("--out", se_out, "Output directory")->required();
    campaign->add_flag("--serial", cp_serial, "Run cases one at a time");
    auto* serve = app.add_subcommand("serve", "HTTP/SSE session API");
    std::string sv_bind = "127.0.0.1:8080";
    double sv_pace = 10.0;
    serve->add_option("--bind", sv_bind, "host:port");
    serve->add_option("--session", se_config, "Default session config JSON")->check(CLI::ExistingFile);
    serve->add_option("--pace", sv_pace, "Simulated seconds per wall second, 0 = unpaced");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*datagen) {
            const auto spec = scenario::spec_from_json(read_json(dg_spec));
            const auto t0 = std::chrono::steady_clock::now();
            const auto db = scenario::generate_database(spec, load_plant(dg_plant), dg_seed, dg_jobs);
            scenario::write_database(dg_out, db);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << db.transients.size() << " transients (" << db.failures.size() << " failed) in " << s
                      << " s -> " << dg_out << "\nfingerprint " << db.fingerprint() << "\n";
        } else if (*train_dtd) {
            const auto db = scenario::read_database(tr_db);
            auto cfg = dtd::diagnosis_config_from_json(tr_config.empty() ? json::object() : read_json(tr_config));
            cfg.train.on_epoch = epoch_logger(quiet);
            const auto m = dtd::train_dtd(db, cfg);
            m.save(tr_out);
            print_report("test", m.evaluation.test);
            std::cout << "best epoch " << m.evaluation.best_epoch << " of " << m.evaluation.epochs_run << " ("
                      << m.evaluation.stop_reason << ") -> " << tr_out << "\n";
        } else if (*train_dtp) {
            const auto db = scenario::read_database(tr_db);
            auto cfg = dtp::prognosis_config_from_json(tr_config.empty() ? json::object() : read_json(tr_config));
            cfg.train.on_epoch = epoch_logger(quiet);
            const auto m = dtp::train_dtp(db, cfg);
            m.save(tr_out);
            print_report("one-step test", m.evaluation.one_step_test);
            print_report("closed-loop test", m.evaluation.closed_loop_test);
            std::cout << "best epoch " << m.evaluation.best_epoch << " of " << m.evaluation.epochs_run << " ("
                      << m.evaluation.stop_reason << ") -> " << tr_out << "\n";
        } else if (*eval_dtd) {
            const auto m = dtd::DiagnosisModel::load(ev_model);
            const auto db = scenario::read_database(ev_db);
            json out;
            const auto r = dtd::evaluate_dtd(m, db.transients);
            print_report("clean", r);
            out["clean"] = report_json(r);
            if (ev_noise >= 0.0) {
                auto& rows = out["noise_study"] = json::array();
                for (const auto& row : dtd::noise_study(m, db.transients, ev_noise, ev_seed)) {
                    print_report("noise: " + row.label, row.report);
                    rows.push_back({{"input", row.label}, {"report", report_json(row.report)}});
                }
            }
            if (!ev_out.empty()) write_json(ev_out, out);
        } else if (*eval_dtp) {
            const auto m = dtp::PrognosisModel::load(ev_model);
            const auto db = scenario::read_database(ev_db);
            const double t_r = ep_tr < 0.0 ? m.config.eval_t_r : ep_tr;
            const double hist = ep_hist < 0.0 ? m.config.warmup_history : ep_hist;
            json out;
            const auto one = dtp::evaluate_one_step(m, db.transients);
            const auto closed = dtp::evaluate_closed_loop(m, db.transients, t_r, hist);
            print_report("one-step", one);
            print_report("closed-loop from t=" + format_double(t_r), closed);
            out["one_step"] = report_json(one);
            out["closed_loop"] = report_json(closed);
            out["t_r"] = t_r;
            out["history"] = hist;
            if (!ep_lengths.empty()) {
                auto& rows = out["history_study"] = json::array();
                for (const auto& p : dtp::history_sensitivity(m, db.transients, parse_list(ep_lengths), t_r)) {
                    std::cout << "history " << p.length << " s  pfcl mse " << p.report.mse_of(std::string(var::pfcl_temp))
                              << "\n";
                    rows.push_back({{"length", p.length}, {"report", report_json(p.report)}});
                }
            }
            if (!ev_out.empty()) write_json(ev_out, out);
        } else if (*coverage) {
            const auto ref = scenario::read_database(cv_ref);
            std::vector<std::string> features = cv_features;
            if (features.empty()) {
                for (auto n : var::state_columns) features.emplace_back(n);
            }
            std::optional<dtd::DiagnosisModel> model;
            if (!cv_model.empty()) model = dtd::DiagnosisModel::load(cv_model);
            std::vector<scenario::Database> dbs;
            dbs.reserve(cv_targets.size());
            std::vector<analytics::CoverageTarget> targets;
            for (const auto& t : cv_targets) {
                const auto eq = t.find('=');
                if (eq == std::string::npos) throw InvalidSpec("--target expects name=dir, got '" + t + "'");
                dbs.push_back(scenario::read_database(t.substr(eq + 1)));
                targets.push_back({t.substr(0, eq), nullptr, std::nullopt});
            }
            for (std::size_t i = 0; i < targets.size(); ++i) {
                targets[i].transients = &dbs[i].transients;
                if (model) targets[i].model_error = dtd::evaluate_dtd(*model, dbs[i].transients).rmse_of(std::string(var::pfcl_temp));
            }
            const auto rep = analytics::coverage_report(ref.transients, targets, features, cv_grid);
            for (const auto& r : rep.rows) {
                std::cout << r.name << "  sym_kl " << r.sym_kl_mean << "  hellinger_sq " << r.hellinger_sq_mean;
                if (r.model_error) std::cout << "  pfcl_rmse " << *r.model_error;
                std::cout << "\n";
            }
            if (rep.pcc_sym_kl) std::cout << "pcc(sym_kl, error) " << *rep.pcc_sym_kl << "\n";
            if (rep.pcc_hellinger_sq) std::cout << "pcc(hellinger_sq, error) " << *rep.pcc_hellinger_sq << "\n";
            if (!cv_out.empty()) write_csv(cv_out, rep.to_csv());
        } else if (*sensitivity || *hyperopt) {
            const auto db = scenario::read_database(tu_db);
            const json base = tu_config.empty() ? json::object() : read_json(tu_config);
            const auto space = analytics::ranges_from_json(read_json(tu_space));
            const auto objective = twin_objective(tu_twin, db, base);
            const auto defaults = defaults_for(tu_twin, base, space);
            if (*sensitivity) {
                const auto rep = analytics::sensitivity_scan(space, defaults, objective, tu_n, tu_seed, tu_jobs);
                for (const auto& e : rep.entries) {
                    std::cout << e.name << "  pcc " << e.pcc << (e.strong ? "  (strong)" : "") << "  failures "
                              << e.failures << "\n";
                }
                if (!tu_out.empty()) write_csv(tu_out, rep.to_csv());
            } else {
                analytics::SmboConfig sc;
                sc.n_trials = tu_n;
                sc.n_startup = std::min(tu_startup, tu_n);
                const auto res = analytics::smbo_optimize(objective, space, sc, tu_seed, defaults);
                std::cout << "best objective " << res.best_objective << " at trial " << res.best_index << "\n";
                for (const auto& [k, v] : res.best_params) std::cout << "  " << k << " = " << v << "\n";
                if (res.default_objective) std::cout << "defaults scored " << *res.default_objective << "\n";
                if (!tu_out.empty()) write_csv(tu_out, res.to_csv());
            }
        } else if (*demo) {
            const auto cfg = orch::session_config_from_json(read_json(se_config));
            const auto assets = orch::Assets::load(cfg);
            const auto r = orch::run_workflow(cfg, assets, orch::auto_accept());
            const fs::path out(se_out);
            fs::create_directories(out);
            write_transient_csv(out / "realized.csv", r.realized);
            write_transient_csv(out / "observed.csv", r.observed);
            if (!r.expected.time.empty()) write_transient_csv(out / "expected.csv", r.expected);
            if (r.recommendation) {
                write_csv(out / "reward_grid.csv", r.recommendation->grid.to_csv());
                CsvTable ranked;
                ranked.header = {"rank", "tau2_end", "t_trip", "reward_pfcl", "reward_power", "reward_torque", "reward_total"};
                for (std::size_t i = 0; i < r.recommendation->ranked.size(); ++i) {
                    const auto& c = r.recommendation->ranked[i];
                    ranked.add_numeric_row({static_cast<double>(i + 1), c.strategy.tau2_end, c.strategy.t_trip,
                                            c.rewards.pfcl, c.rewards.power, c.rewards.torque, c.rewards.total});
                }
                write_csv(out / "ranked.csv", ranked);
            }
            write_json(out / "transcript.json", r.to_json());
            std::cout << "phase " << orch::to_string(r.phase) << "\n";
            if (r.decision && r.decision->candidate) {
                std::cout << "strategy tau2_end " << r.decision->candidate->tau2_end << " N·m, t_trip "
                          << r.decision->candidate->t_trip << " s\n";
            }
            for (const auto& rep : r.reports) {
                std::cout << "t_ck " << rep.t_ck << "  zeta_power " << rep.zeta_power << "  zeta_pfcl " << rep.zeta_pfcl
                          << "  " << (rep.verdict == decision::Verdict::Scram ? "SCRAM" : "continue") << "\n";
            }
            if (!r.scram_reason.empty()) std::cout << "scram: " << r.scram_reason << "\n";
            std::cout << "-> " << out.string() << "\n";
        } else if (*campaign) {
            const auto spec = orch::campaign_spec_from_json(read_json(se_config));
            const auto assets = orch::Assets::load(spec.base);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = orch::run_campaign(spec, assets, !cp_serial);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const fs::path out(se_out);
            fs::create_directories(out);
            write_csv(out / "campaign.csv", res.to_csv());
            write_json(out / "campaign.json", res.to_json());
            std::size_t scrams = 0;
            for (const auto& c : res.cases) scrams += c.phase == orch::Phase::Scrammed;
            std::cout << res.cases.size() << " cases in " << s << " s, " << scrams << " scrammed, " << res.failures()
                      << " failed -> " << out.string() << "\n";
        } else if (*serve) {
            orch::ServerOptions opts;
            opts.pace = sv_pace;
            opts.defaults.mode = orch::Mode::Interactive;
            if (!se_config.empty()) opts.defaults = orch::session_config_from_json(read_json(se_config), opts.defaults);
            orch::Assets assets;
            if (!opts.defaults.dtd_model.empty() && !opts.defaults.dtp_model.empty()) assets = orch::Assets::load(opts.defaults);
            const auto [host, port] = orch::parse_bind(sv_bind);
            orch::ApiServer server(opts, assets);
            const int bound = server.start(host, port);
            std::cout << "listening on " << host << ":" << bound << "/api/v1" << std::endl;
            std::signal(SIGINT, [](int) { g_stop = true; });
            std::signal(SIGTERM, [](int) { g_stop = true; });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
            server.stop();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
