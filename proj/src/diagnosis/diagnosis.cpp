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

#include "twinctl/diagnosis/diagnosis.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "twinctl/common/error.hpp"
#include "twinctl/common/features.hpp"
#include "twinctl/common/random.hpp"
#include "twinctl/common/seed.hpp"
#include "twinctl/common/variables.hpp"

namespace twinctl::dtd {

namespace {

constexpr const char* kSchema = "twinctl.dtd.v1";

std::vector<std::string> names_of(std::initializer_list<std::string_view> v)
{
    return {v.begin(), v.end()};
}

/// Column k of the window that ends at t, clamped to the first sample.
Eigen::MatrixXd window_step(const Eigen::MatrixXd& z, int window, int k)
{
    const Eigen::Index T = z.cols();
    Eigen::MatrixXd x(z.rows(), T);
    const Eigen::Index back = window - 1 - k;
    for (Eigen::Index t = 0; t < T; ++t) {
        x.col(t) = z.col(std::max<Eigen::Index>(0, t - back));
    }
    return x;
}

void build_rnn_set(const std::vector<Transient>& set, const DiagnosisModel& m, int stride,
                   nn::SequenceDataset& out)
{
    const int W = m.window();
    const auto n_out = static_cast<Eigen::Index>(m.config.outputs.size());
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(W);
    mask(W - 1) = 1.0;
    for (const auto& tr : set) {
        const Eigen::MatrixXd z = m.input_norm.normalize(feature_matrix(tr, m.config.inputs));
        const Eigen::MatrixXd y = m.output_norm.normalize(feature_matrix(tr, m.config.outputs));
        for (Eigen::Index t = 0; t < z.cols(); t += stride) {
            Eigen::MatrixXd xs(z.rows(), W);
            for (int k = 0; k < W; ++k) {
                xs.col(k) = z.col(std::max<Eigen::Index>(0, t - (W - 1 - k)));
            }
            Eigen::MatrixXd ys = Eigen::MatrixXd::Zero(n_out, W);
            ys.col(W - 1) = y.col(t);
            out.inputs.push_back(std::move(xs));
            out.targets.push_back(std::move(ys));
            out.masks.push_back(mask);
        }
    }
}

nn::DenseDataset build_dense_set(const std::vector<Transient>& set, const DiagnosisModel& m, int stride)
{
    const Eigen::MatrixXd x = m.input_norm.normalize(pooled_features(set, m.config.inputs));
    const Eigen::MatrixXd y = m.output_norm.normalize(pooled_features(set, m.config.outputs));
    if (stride == 1) {
        return {x, y};
    }
    const Eigen::Index n = (x.cols() + stride - 1) / stride;
    nn::DenseDataset d{Eigen::MatrixXd(x.rows(), n), Eigen::MatrixXd(y.rows(), n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        d.x.col(i) = x.col(i * stride);
        d.y.col(i) = y.col(i * stride);
    }
    return d;
}

std::vector<std::string> strings_from(const nlohmann::json& j, const char* key)
{
    return j.at(key).get<std::vector<std::string>>();
}

} // namespace

std::string to_string(Variant v)
{
    return v == Variant::Fnn ? "fnn" : "rnn";
}

Variant variant_from_string(const std::string& s)
{
    if (s == "fnn") {
        return Variant::Fnn;
    }
    if (s == "rnn") {
        return Variant::Rnn;
    }
    throw InvalidSpec("diagnosis variant must be 'fnn' or 'rnn', got '" + s + "'");
}

DiagnosisConfig::DiagnosisConfig()
    : inputs(names_of({var::lp_plenum_temp, var::hp_plenum_temp, var::upper_plenum_temp})),
      outputs(names_of({var::pfcl_temp, var::peak_clad_temp}))
{
    train.sequence_length = 5;
    train.batch_size = 100;
    train.learning_rate = 0.001;
    train.hidden = 30;
    train.layers = 2;
}

void DiagnosisConfig::validate() const
{
    check_disjoint(inputs, outputs);
    train.validate();
    if (window_stride < 1) {
        throw InvalidSpec("window_stride must be at least 1");
    }
    const double total = split[0] + split[1] + split[2];
    if (!(split[0] > 0.0 && split[1] > 0.0 && split[2] > 0.0) || std::abs(total - 1.0) > 1e-9) {
        throw InvalidSpec("split fractions must be positive and sum to 1");
    }
}

nlohmann::json to_json(const DiagnosisConfig& c)
{
    return {{"variant", to_string(c.variant)},
            {"inputs", c.inputs},
            {"outputs", c.outputs},
            {"train", nn::to_json(c.train)},
            {"window_stride", c.window_stride},
            {"split", {c.split[0], c.split[1], c.split[2]}},
            {"split_seed", c.split_seed}};
}

DiagnosisConfig diagnosis_config_from_json(const nlohmann::json& j, DiagnosisConfig c)
{
    if (!j.is_object()) {
        throw ParseError("diagnosis config must be a JSON object");
    }
    const nlohmann::json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown diagnosis key '" + key + "'");
        }
    }
    if (j.contains("variant")) {
        c.variant = variant_from_string(j.at("variant").get<std::string>());
    }
    if (j.contains("inputs")) {
        c.inputs = strings_from(j, "inputs");
    }
    if (j.contains("outputs")) {
        c.outputs = strings_from(j, "outputs");
    }
    if (j.contains("train")) {
        c.train = nn::train_config_from_json(j.at("train"), c.train);
    }
    c.window_stride = j.value("window_stride", c.window_stride);
    if (j.contains("split")) {
        const auto f = j.at("split").get<std::vector<double>>();
        if (f.size() != 3) {
            throw ParseError("split needs three fractions");
        }
        c.split = {f[0], f[1], f[2]};
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    c.validate();
    return c;
}

int DiagnosisModel::window() const
{
    return config.variant == Variant::Rnn ? config.train.sequence_length : 1;
}

Eigen::MatrixXd DiagnosisModel::estimate(const Eigen::MatrixXd& x) const
{
    if (x.rows() != static_cast<Eigen::Index>(config.inputs.size())) {
        throw DimensionMismatch("diagnosis expects " + std::to_string(config.inputs.size()) + " inputs");
    }
    if (x.cols() == 0) {
        throw WindowTooShort("no samples to diagnose");
    }
    const Eigen::MatrixXd z = input_norm.normalize(x);
    if (config.variant == Variant::Fnn) {
        if (!fnn) {
            throw ModelLoadError("diagnosis model has no feedforward net");
        }
        return output_norm.inverse(fnn->forward_batch(z));
    }
    if (!rnn) {
        throw ModelLoadError("diagnosis model has no recurrent net");
    }
    const int W = window();
    nn::GruState state = rnn->zero_state(z.cols());
    Eigen::MatrixXd y;
    for (int k = 0; k < W; ++k) {
        y = rnn->step(window_step(z, W, k), state);
    }
    return output_norm.inverse(y);
}

Transient DiagnosisModel::infer(const Transient& sensors) const
{
    const Eigen::MatrixXd est = estimate(feature_matrix(sensors, config.inputs));
    Transient out;
    out.scenario_id = sensors.scenario_id;
    out.issue_point = sensors.issue_point;
    out.seed = sensors.seed;
    out.time = sensors.time;
    for (std::size_t i = 0; i < config.outputs.size(); ++i) {
        const Eigen::RowVectorXd row = est.row(static_cast<Eigen::Index>(i));
        out.add_column(config.outputs[i], std::vector<double>(row.data(), row.data() + row.size()));
    }
    return out;
}

nlohmann::json DiagnosisModel::to_json() const
{
    nlohmann::json ev = {{"train", evaluation.train.to_json()},
                         {"validation", evaluation.validation.to_json()},
                         {"test", evaluation.test.to_json()},
                         {"best_epoch", evaluation.best_epoch},
                         {"epochs_run", evaluation.epochs_run},
                         {"stop_reason", evaluation.stop_reason}};
    nlohmann::json net = config.variant == Variant::Fnn ? fnn.value().to_json() : rnn.value().to_json();
    return {{"schema", kSchema},
            {"config", dtd::to_json(config)},
            {"database_fingerprint", database_fingerprint},
            {"input_norm", input_norm.to_json()},
            {"output_norm", output_norm.to_json()},
            {"net", std::move(net)},
            {"evaluation", std::move(ev)}};
}

DiagnosisModel DiagnosisModel::from_json(const nlohmann::json& j)
{
    try {
        if (j.value("schema", "") != kSchema) {
            throw ModelLoadError("not a diagnosis model file");
        }
        DiagnosisModel m;
        m.config = diagnosis_config_from_json(j.at("config"));
        m.database_fingerprint = j.at("database_fingerprint").get<std::string>();
        m.input_norm = nn::Normalizer::from_json(j.at("input_norm"));
        m.output_norm = nn::Normalizer::from_json(j.at("output_norm"));
        if (m.config.variant == Variant::Fnn) {
            m.fnn = nn::FeedforwardNet::from_json(j.at("net"));
            if (m.fnn->inputs() != static_cast<int>(m.config.inputs.size()) ||
                m.fnn->outputs() != static_cast<int>(m.config.outputs.size())) {
                throw ModelLoadError("net shape does not match the feature lists");
            }
        }
        else {
            m.rnn = nn::RecurrentNet::from_json(j.at("net"));
            if (m.rnn->inputs() != static_cast<int>(m.config.inputs.size()) ||
                m.rnn->outputs() != static_cast<int>(m.config.outputs.size())) {
                throw ModelLoadError("net shape does not match the feature lists");
            }
        }
        if (m.input_norm.size() != static_cast<Eigen::Index>(m.config.inputs.size()) ||
            m.output_norm.size() != static_cast<Eigen::Index>(m.config.outputs.size())) {
            throw ModelLoadError("normalizer size does not match the feature lists");
        }
        const auto& ev = j.at("evaluation");
        m.evaluation.train = ErrorReport::from_json(ev.at("train"));
        m.evaluation.validation = ErrorReport::from_json(ev.at("validation"));
        m.evaluation.test = ErrorReport::from_json(ev.at("test"));
        m.evaluation.best_epoch = ev.at("best_epoch").get<int>();
        m.evaluation.epochs_run = ev.at("epochs_run").get<int>();
        m.evaluation.stop_reason = ev.at("stop_reason").get<std::string>();
        return m;
    }
    catch (const ModelLoadError&) {
        throw;
    }
    catch (const std::exception& e) {
        throw ModelLoadError(std::string("bad diagnosis model: ") + e.what());
    }
}

void DiagnosisModel::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << to_json().dump(1) << '\n';
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

DiagnosisModel DiagnosisModel::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    }
    catch (const std::exception& e) {
        throw ModelLoadError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

DiagnosisModel train_dtd(const scenario::Split& split, const DiagnosisConfig& config,
                         const std::string& database_fingerprint)
{
    config.validate();
    DiagnosisModel m;
    m.config = config;
    m.database_fingerprint = database_fingerprint;
    m.input_norm = nn::Normalizer::fit(pooled_features(split.train, config.inputs), config.inputs);
    m.output_norm = nn::Normalizer::fit(pooled_features(split.train, config.outputs), config.outputs);
    const int n_in = static_cast<int>(config.inputs.size());
    const int n_out = static_cast<int>(config.outputs.size());
    const auto& tc = config.train;

    nn::TrainResult r;
    if (config.variant == Variant::Fnn) {
        std::vector<int> widths{n_in};
        widths.insert(widths.end(), static_cast<std::size_t>(tc.layers), tc.hidden);
        widths.push_back(n_out);
        m.fnn = nn::FeedforwardNet(widths, tc.seed);
        r = nn::train(*m.fnn, build_dense_set(split.train, m, config.window_stride),
                      build_dense_set(split.validation, m, 1), build_dense_set(split.test, m, 1), tc);
    }
    else {
        m.rnn = nn::RecurrentNet(n_in, tc.hidden, tc.layers, n_out, tc.seed);
        nn::SequenceDataset tr, va, te;
        build_rnn_set(split.train, m, config.window_stride, tr);
        build_rnn_set(split.validation, m, 1, va);
        build_rnn_set(split.test, m, 1, te);
        r = nn::train(*m.rnn, tr, va, te, tc);
    }
    m.evaluation.best_epoch = r.best_epoch;
    m.evaluation.epochs_run = static_cast<int>(r.history.size());
    m.evaluation.stop_reason = r.stop_reason;
    m.evaluation.train = evaluate_dtd(m, split.train);
    m.evaluation.validation = evaluate_dtd(m, split.validation);
    m.evaluation.test = evaluate_dtd(m, split.test);
    return m;
}

DiagnosisModel train_dtd(const scenario::Database& db, const DiagnosisConfig& config)
{
    config.validate();
    const auto split = scenario::split_database(db.transients, config.split, config.split_seed);
    return train_dtd(split, config, db.fingerprint());
}

Transient infer_ssf(const DiagnosisModel& model, std::span<const plant::SensorFrame> window)
{
    if (window.empty() || static_cast<int>(window.size()) < model.window()) {
        throw WindowTooShort("diagnosis needs at least " + std::to_string(model.window()) + " frames, got " +
                             std::to_string(window.size()));
    }
    const auto& names = model.config.inputs;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(window.size()));
    Transient sensors;
    for (std::size_t t = 0; t < window.size(); ++t) {
        if (t > 0 && !(window[t].time > window[t - 1].time)) {
            throw InvalidSpec("sensor frames must be in increasing time order");
        }
        sensors.time.push_back(window[t].time);
        for (std::size_t i = 0; i < names.size(); ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = window[t].at(names[i]);
        }
    }
    const Eigen::MatrixXd est = model.estimate(x);
    for (std::size_t i = 0; i < model.config.outputs.size(); ++i) {
        const Eigen::RowVectorXd row = est.row(static_cast<Eigen::Index>(i));
        sensors.add_column(model.config.outputs[i], std::vector<double>(row.data(), row.data() + row.size()));
    }
    return sensors;
}

ErrorReport evaluate_dtd(const DiagnosisModel& model, const std::vector<Transient>& transients,
                         const NoiseSpec& noise)
{
    const auto& ins = model.config.inputs;
    const auto& outs = model.config.outputs;
    if (!noise.c.empty() && noise.c.size() != ins.size()) {
        throw DimensionMismatch("noise spec needs one coefficient per input");
    }
    const auto n_out = static_cast<Eigen::Index>(outs.size());
    Eigen::VectorXd sse = Eigen::VectorXd::Zero(n_out);
    std::size_t points = 0;
    for (std::size_t k = 0; k < transients.size(); ++k) {
        Eigen::MatrixXd x = feature_matrix(transients[k], ins);
        if (!noise.c.empty()) {
            std::mt19937_64 gen(derive_seed(noise.seed, k));
            for (Eigen::Index t = 0; t < x.cols(); ++t) {
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    const double e = standard_normal(gen);
                    x(i, t) += noise.c[static_cast<std::size_t>(i)] * std::abs(x(i, t)) * e;
                }
            }
        }
        const Eigen::MatrixXd y = feature_matrix(transients[k], outs);
        sse += (model.estimate(x) - y).array().square().rowwise().sum().matrix();
        points += static_cast<std::size_t>(y.cols());
    }
    if (points == 0) {
        throw EmptyInput("no transients to evaluate");
    }
    ErrorReport r;
    r.names = outs;
    r.points = points;
    for (Eigen::Index i = 0; i < n_out; ++i) {
        r.mse.push_back(sse(i) / static_cast<double>(points));
        r.rmse.push_back(std::sqrt(r.mse.back()));
    }
    return r;
}

std::vector<NoiseRow> noise_study(const DiagnosisModel& model, const std::vector<Transient>& transients, double c,
                                  std::uint64_t seed)
{
    std::vector<NoiseRow> rows;
    rows.push_back({"clean", evaluate_dtd(model, transients)});
    const auto& ins = model.config.inputs;
    for (std::size_t i = 0; i < ins.size(); ++i) {
        NoiseSpec spec{std::vector<double>(ins.size(), 0.0), seed};
        spec.c[i] = c;
        rows.push_back({ins[i], evaluate_dtd(model, transients, spec)});
    }
    return rows;
}

} // namespace twinctl::dtd
