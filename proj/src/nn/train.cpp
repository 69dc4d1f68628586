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

#include "twinctl/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "twinctl/common/error.hpp"

namespace twinctl::nn {

namespace {

// Batches are split into fixed column groups so gradient sums happen in the
// same order whatever the thread count.
constexpr Eigen::Index kGroup = 64;
constexpr Eigen::Index kEvalChunk = 32;

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& gen)
{
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(gen() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

struct OptimizerState {
    Eigen::VectorXd first;
    Eigen::VectorXd second;
    long steps = 0;
};

void apply_update(const TrainConfig& c, double lr, Eigen::VectorXd& theta, Eigen::VectorXd& grad, OptimizerState& s)
{
    if (c.grad_clip > 0.0) {
        const double norm = grad.norm();
        if (norm > c.grad_clip) {
            grad *= c.grad_clip / norm;
        }
    }
    if (s.first.size() != theta.size()) {
        s.first = Eigen::VectorXd::Zero(theta.size());
        s.second = Eigen::VectorXd::Zero(theta.size());
    }
    ++s.steps;
    if (c.optimizer == Optimizer::SgdMomentum) {
        s.first = c.momentum * s.first - lr * grad;
        theta += s.first;
        return;
    }
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    s.first = b1 * s.first + (1.0 - b1) * grad;
    s.second = b2 * s.second + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.steps));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.steps));
    theta.array() -= lr * (s.first.array() / c1) / ((s.second.array() / c2).sqrt() + eps);
}

template <class Fn>
void parallel_groups(Eigen::Index groups, Fn&& fn)
{
    std::optional<std::string> failure;
#pragma omp parallel for schedule(static)
    for (Eigen::Index g = 0; g < groups; ++g) {
        try {
            fn(g);
        }
        catch (const std::exception& e) {
#pragma omp critical(twinctl_nn_failure)
            if (!failure) {
                failure = e.what();
            }
        }
    }
    if (failure) {
        throw Error(*failure);
    }
}

// ---- feedforward ----

LossValue fnn_grouped(const FeedforwardNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      Eigen::VectorXd* grad)
{
    const Eigen::Index n = x.cols();
    const Eigen::Index groups = (n + kGroup - 1) / kGroup;
    std::vector<double> loss(static_cast<std::size_t>(groups));
    std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(groups));
    parallel_groups(groups, [&](Eigen::Index g) {
        const Eigen::Index c0 = g * kGroup;
        const Eigen::Index w = std::min(kGroup, n - c0);
        const auto gi = static_cast<std::size_t>(g);
        loss[gi] = net.loss(x.middleCols(c0, w), y.middleCols(c0, w), 0.0, grad ? &grads[gi] : nullptr);
    });
    LossValue lv;
    if (grad) {
        grad->setZero(net.params.size());
    }
    for (Eigen::Index g = 0; g < groups; ++g) {
        const Eigen::Index w = std::min(kGroup, n - g * kGroup);
        const double count = static_cast<double>(w * y.rows());
        const auto gi = static_cast<std::size_t>(g);
        lv.sse += loss[gi] * count;
        lv.count += count;
        if (grad) {
            *grad += (count / static_cast<double>(n * y.rows())) * grads[gi];
        }
    }
    return lv;
}

// ---- recurrent ----

BatchSteps make_steps(const SequenceDataset& d, const std::vector<std::size_t>& idx, Eigen::Index t0, Eigen::Index t1)
{
    const auto B = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index n_in = d.inputs[idx[0]].rows();
    const Eigen::Index n_out = d.targets[idx[0]].rows();
    BatchSteps s;
    for (Eigen::Index t = t0; t < t1; ++t) {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_in, B);
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_out, B);
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(B);
        for (Eigen::Index b = 0; b < B; ++b) {
            const std::size_t k = idx[static_cast<std::size_t>(b)];
            if (t < d.inputs[k].cols()) {
                x.col(b) = d.inputs[k].col(t);
                y.col(b) = d.targets[k].col(t);
                m(b) = d.masks[k](t);
            }
        }
        s.x.push_back(std::move(x));
        s.y.push_back(std::move(y));
        s.m.push_back(std::move(m));
    }
    return s;
}

LossValue gru_grouped(const RecurrentNet& net, const BatchSteps& steps, GruState& state, Eigen::VectorXd* grad)
{
    const Eigen::Index B = steps.x.front().cols();
    const Eigen::Index groups = (B + kGroup - 1) / kGroup;
    std::vector<LossValue> parts(static_cast<std::size_t>(groups));
    std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(groups));
    parallel_groups(groups, [&](Eigen::Index g) {
        const Eigen::Index c0 = g * kGroup;
        const Eigen::Index w = std::min(kGroup, B - c0);
        BatchSteps sub;
        for (std::size_t t = 0; t < steps.x.size(); ++t) {
            sub.x.push_back(steps.x[t].middleCols(c0, w));
            sub.y.push_back(steps.y[t].middleCols(c0, w));
            sub.m.push_back(steps.m[t].segment(c0, w));
        }
        GruState st;
        for (const auto& h : state.h) {
            st.h.push_back(h.middleCols(c0, w));
        }
        const auto gi = static_cast<std::size_t>(g);
        parts[gi] = net.loss(sub, st, 0.0, grad ? &grads[gi] : nullptr);
        for (std::size_t l = 0; l < st.h.size(); ++l) {
            state.h[l].middleCols(c0, w) = st.h[l];
        }
    });
    LossValue lv;
    for (const auto& p : parts) {
        lv.sse += p.sse;
        lv.count += p.count;
    }
    if (grad) {
        grad->setZero(net.params.size());
        if (lv.count > 0.0) {
            for (std::size_t g = 0; g < parts.size(); ++g) {
                if (parts[g].count > 0.0) {
                    *grad += (parts[g].count / lv.count) * grads[g];
                }
            }
        }
    }
    return lv;
}

void require_nonempty(std::size_t n, const char* what)
{
    if (n == 0) {
        throw TooFew(std::string(what) + " set is empty");
    }
}

double finite_or_throw(double v, int epoch)
{
    if (!std::isfinite(v)) {
        throw Divergence("loss became non-finite in epoch " + std::to_string(epoch));
    }
    return v;
}

/// Shared epoch loop: lr decay on validation plateau, early stop on test
/// plateau, keep the best-on-test parameters.
template <class PassFn, class EvalFn>
TrainResult run_epochs(Eigen::VectorXd& theta, const TrainConfig& c, PassFn&& pass, EvalFn&& eval_val,
                       EvalFn&& eval_test)
{
    TrainResult result;
    double lr = c.learning_rate;
    double best_val = std::numeric_limits<double>::infinity();
    double best_test = std::numeric_limits<double>::infinity();
    int since_val = 0;
    int since_test = 0;
    Eigen::VectorXd best_theta = theta;
    result.stop_reason = "epochs_max";
    for (int epoch = 1; epoch <= c.epochs_max; ++epoch) {
        const double train_mse = finite_or_throw(pass(lr), epoch);
        const double val = finite_or_throw(eval_val(), epoch);
        const double test = finite_or_throw(eval_test(), epoch);
        result.history.push_back({epoch, train_mse, val, test, lr});
        if (c.on_epoch) {
            c.on_epoch(result.history.back());
        }
        if (val < best_val) {
            best_val = val;
            since_val = 0;
        }
        else if (++since_val >= c.validation_patience) {
            lr *= c.lr_decay_factor;
            since_val = 0;
        }
        if (test < best_test) {
            best_test = test;
            best_theta = theta;
            result.best_epoch = epoch;
            since_test = 0;
        }
        else if (++since_test >= c.early_stop_patience) {
            result.stop_reason = "early_stop";
            break;
        }
        if (train_mse < c.target_training_error) {
            result.stop_reason = "target_training_error";
            break;
        }
    }
    theta = best_theta;
    return result;
}

GradCheckResult compare(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric)
{
    GradCheckResult r;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic(i);
        const double n = numeric(i);
        const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
        r.max_rel_error = std::max(r.max_rel_error, std::abs(a - n) / denom);
        r.max_abs_analytic = std::max(r.max_abs_analytic, std::abs(a));
        r.max_abs_numeric = std::max(r.max_abs_numeric, std::abs(n));
    }
    return r;
}

void check_eps(double eps)
{
    if (!(eps >= 1e-7 && eps <= 1e-3)) {
        throw InvalidSpec("grad_check eps must lie in [1e-7, 1e-3]");
    }
}

template <class LossFn>
Eigen::VectorXd numeric_gradient(Eigen::VectorXd& theta, double eps, LossFn&& loss)
{
    Eigen::VectorXd g(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double keep = theta(i);
        theta(i) = keep + eps;
        const double fp = loss();
        theta(i) = keep - eps;
        const double fm = loss();
        theta(i) = keep;
        g(i) = (fp - fm) / (2.0 * eps);
    }
    return g;
}

} // namespace

void TrainConfig::validate() const
{
    if (sequence_length < 1 || batch_size < 1 || epochs_max < 1 || validation_patience < 1 ||
        early_stop_patience < 1 || hidden < 1 || layers < 1) {
        throw InvalidSpec("training counts must be positive");
    }
    if (!(learning_rate > 0.0) || !(l2 >= 0.0) || !(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0) ||
        !(momentum >= 0.0 && momentum < 1.0) || !(grad_clip >= 0.0) || !(target_training_error >= 0.0)) {
        throw InvalidSpec("training rates out of range");
    }
}

nlohmann::json to_json(const TrainConfig& c)
{
    return {
        {"sequence_length", c.sequence_length},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"epochs_max", c.epochs_max},
        {"target_training_error", c.target_training_error},
        {"validation_patience", c.validation_patience},
        {"l2", c.l2},
        {"lr_decay_factor", c.lr_decay_factor},
        {"early_stop_patience", c.early_stop_patience},
        {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd_momentum"},
        {"momentum", c.momentum},
        {"grad_clip", c.grad_clip},
        {"hidden", c.hidden},
        {"layers", c.layers},
        {"seed", c.seed},
    };
}

void apply_hyperparameters(TrainConfig& c, const std::map<std::string, double>& values)
{
    for (const auto& [name, v] : values) {
        const int k = static_cast<int>(std::lround(v));
        if (name == "sequence_length") c.sequence_length = k;
        else if (name == "hidden") c.hidden = k;
        else if (name == "layers") c.layers = k;
        else if (name == "batch_size") c.batch_size = k;
        else if (name == "validation_patience") c.validation_patience = k;
        else if (name == "early_stop_patience") c.early_stop_patience = k;
        else if (name == "epochs_max") c.epochs_max = k;
        else if (name == "learning_rate") c.learning_rate = v;
        else if (name == "l2") c.l2 = v;
        else if (name == "momentum") c.momentum = v;
        else throw InvalidSpec("unknown hyperparameter '" + name + "'");
    }
    c.validate();
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c)
{
    if (!j.is_object()) {
        throw ParseError("training config must be a JSON object");
    }
    const nlohmann::json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError("unknown training key '" + key + "'");
        }
    }
    c.sequence_length = j.value("sequence_length", c.sequence_length);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs_max = j.value("epochs_max", c.epochs_max);
    c.target_training_error = j.value("target_training_error", c.target_training_error);
    c.validation_patience = j.value("validation_patience", c.validation_patience);
    c.l2 = j.value("l2", c.l2);
    c.lr_decay_factor = j.value("lr_decay_factor", c.lr_decay_factor);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    if (j.contains("optimizer")) {
        const auto name = j.at("optimizer").get<std::string>();
        if (name == "adam") {
            c.optimizer = Optimizer::Adam;
        }
        else if (name == "sgd_momentum") {
            c.optimizer = Optimizer::SgdMomentum;
        }
        else {
            throw ParseError("optimizer must be 'sgd_momentum' or 'adam'");
        }
    }
    c.momentum = j.value("momentum", c.momentum);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.hidden = j.value("hidden", c.hidden);
    c.layers = j.value("layers", c.layers);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

double evaluate_mse(const FeedforwardNet& net, const DenseDataset& data)
{
    require_nonempty(static_cast<std::size_t>(data.size()), "evaluation");
    const LossValue lv = fnn_grouped(net, data.x, data.y, nullptr);
    return lv.sse / lv.count;
}

double evaluate_mse(const RecurrentNet& net, const SequenceDataset& data)
{
    require_nonempty(data.size(), "evaluation");
    data.validate(net.inputs(), net.outputs());
    double sse = 0.0;
    double count = 0.0;
    constexpr std::size_t kSeqBatch = 256;
    for (std::size_t s0 = 0; s0 < data.size(); s0 += kSeqBatch) {
        std::vector<std::size_t> idx;
        Eigen::Index t_max = 0;
        for (std::size_t k = s0; k < std::min(data.size(), s0 + kSeqBatch); ++k) {
            idx.push_back(k);
            t_max = std::max(t_max, data.inputs[k].cols());
        }
        GruState state = net.zero_state(static_cast<Eigen::Index>(idx.size()));
        for (Eigen::Index t0 = 0; t0 < t_max; t0 += kEvalChunk) {
            const BatchSteps steps = make_steps(data, idx, t0, std::min(t_max, t0 + kEvalChunk));
            const LossValue lv = gru_grouped(net, steps, state, nullptr);
            sse += lv.sse;
            count += lv.count;
        }
    }
    if (!(count > 0.0)) {
        throw TooFew("evaluation set has no scored steps");
    }
    return sse / count;
}

double full_loss(const RecurrentNet& net, const SequenceDataset& data, double l2, Eigen::VectorXd* grad)
{
    data.validate(net.inputs(), net.outputs());
    std::vector<std::size_t> idx(data.size());
    Eigen::Index t_max = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        idx[k] = k;
        t_max = std::max(t_max, data.inputs[k].cols());
    }
    GruState state = net.zero_state(static_cast<Eigen::Index>(idx.size()));
    return net.loss(make_steps(data, idx, 0, t_max), state, l2, grad).total;
}

TrainResult train(FeedforwardNet& net, const DenseDataset& train_set, const DenseDataset& validation,
                  const DenseDataset& test, const TrainConfig& c)
{
    c.validate();
    require_nonempty(static_cast<std::size_t>(train_set.size()), "training");
    require_nonempty(static_cast<std::size_t>(validation.size()), "validation");
    require_nonempty(static_cast<std::size_t>(test.size()), "test");
    std::mt19937_64 gen(c.seed);
    OptimizerState opt;
    const auto n = static_cast<std::size_t>(train_set.size());
    auto pass = [&](double lr) {
        const auto order = shuffled(n, gen);
        double sse = 0.0;
        double count = 0.0;
        Eigen::VectorXd grad;
        for (std::size_t b0 = 0; b0 < n; b0 += static_cast<std::size_t>(c.batch_size)) {
            const std::size_t w = std::min(n - b0, static_cast<std::size_t>(c.batch_size));
            Eigen::MatrixXd x(train_set.x.rows(), static_cast<Eigen::Index>(w));
            Eigen::MatrixXd y(train_set.y.rows(), static_cast<Eigen::Index>(w));
            for (std::size_t k = 0; k < w; ++k) {
                x.col(static_cast<Eigen::Index>(k)) = train_set.x.col(static_cast<Eigen::Index>(order[b0 + k]));
                y.col(static_cast<Eigen::Index>(k)) = train_set.y.col(static_cast<Eigen::Index>(order[b0 + k]));
            }
            const LossValue lv = fnn_grouped(net, x, y, &grad);
            sse += lv.sse;
            count += lv.count;
            grad += 2.0 * c.l2 * net.params.values.cwiseProduct(net.params.weight_mask());
            apply_update(c, lr, net.params.values, grad, opt);
        }
        return sse / count;
    };
    auto eval_val = [&] { return evaluate_mse(net, validation); };
    auto eval_test = [&] { return evaluate_mse(net, test); };
    TrainResult r = run_epochs(net.params.values, c, pass, std::function<double()>(eval_val),
                               std::function<double()>(eval_test));
    r.train_mse = evaluate_mse(net, train_set);
    r.validation_mse = evaluate_mse(net, validation);
    r.test_mse = evaluate_mse(net, test);
    return r;
}

TrainResult train(RecurrentNet& net, const SequenceDataset& train_set, const SequenceDataset& validation,
                  const SequenceDataset& test, const TrainConfig& c)
{
    c.validate();
    require_nonempty(train_set.size(), "training");
    require_nonempty(validation.size(), "validation");
    require_nonempty(test.size(), "test");
    train_set.validate(net.inputs(), net.outputs());
    std::mt19937_64 gen(c.seed);
    OptimizerState opt;
    auto pass = [&](double lr) {
        const auto order = shuffled(train_set.size(), gen);
        double sse = 0.0;
        double count = 0.0;
        Eigen::VectorXd grad;
        const auto bs = static_cast<std::size_t>(c.batch_size);
        for (std::size_t b0 = 0; b0 < order.size(); b0 += bs) {
            std::vector<std::size_t> idx(order.begin() + static_cast<long>(b0),
                                         order.begin() + static_cast<long>(std::min(order.size(), b0 + bs)));
            Eigen::Index t_max = 0;
            for (auto k : idx) {
                t_max = std::max(t_max, train_set.inputs[k].cols());
            }
            GruState state = net.zero_state(static_cast<Eigen::Index>(idx.size()));
            for (Eigen::Index t0 = 0; t0 < t_max; t0 += c.sequence_length) {
                const BatchSteps steps = make_steps(train_set, idx, t0, std::min(t_max, t0 + c.sequence_length));
                const LossValue lv = gru_grouped(net, steps, state, &grad);
                if (!(lv.count > 0.0)) {
                    continue; // burn-in window: carry the state, nothing to score
                }
                sse += lv.sse;
                count += lv.count;
                grad += 2.0 * c.l2 * net.params.values.cwiseProduct(net.params.weight_mask());
                apply_update(c, lr, net.params.values, grad, opt);
            }
        }
        return count > 0.0 ? sse / count : 0.0;
    };
    auto eval_val = [&] { return evaluate_mse(net, validation); };
    auto eval_test = [&] { return evaluate_mse(net, test); };
    TrainResult r = run_epochs(net.params.values, c, pass, std::function<double()>(eval_val),
                               std::function<double()>(eval_test));
    r.train_mse = evaluate_mse(net, train_set);
    r.validation_mse = evaluate_mse(net, validation);
    r.test_mse = evaluate_mse(net, test);
    return r;
}

GradCheckResult grad_check(const FeedforwardNet& net, const DenseDataset& batch, double eps, double l2)
{
    check_eps(eps);
    FeedforwardNet probe = net;
    Eigen::VectorXd analytic;
    probe.loss(batch.x, batch.y, l2, &analytic);
    const Eigen::VectorXd numeric =
        numeric_gradient(probe.params.values, eps, [&] { return probe.loss(batch.x, batch.y, l2, nullptr); });
    return compare(analytic, numeric);
}

GradCheckResult grad_check(const RecurrentNet& net, const SequenceDataset& batch, double eps, double l2)
{
    check_eps(eps);
    RecurrentNet probe = net;
    Eigen::VectorXd analytic;
    full_loss(probe, batch, l2, &analytic);
    const Eigen::VectorXd numeric =
        numeric_gradient(probe.params.values, eps, [&] { return full_loss(probe, batch, l2, nullptr); });
    return compare(analytic, numeric);
}

} // namespace twinctl::nn
