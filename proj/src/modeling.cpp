#include "chainsight/modeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "chainsight/bytes.hpp"
#include "chainsight/errors.hpp"

namespace chainsight::modeling {

using nlohmann::json;

std::string_view to_string(PredictorKind k) {
    switch (k) {
    case PredictorKind::persistence: return "persistence";
    case PredictorKind::null_half: return "null";
    case PredictorKind::linear: return "linear";
    case PredictorKind::mlp: return "mlp";
    }
    return "?";
}

PredictorKind parse_predictor_kind(std::string_view s) {
    if (s == "persistence") return PredictorKind::persistence;
    if (s == "null" || s == "null_half") return PredictorKind::null_half;
    if (s == "linear") return PredictorKind::linear;
    if (s == "mlp") return PredictorKind::mlp;
    throw ValidationError("unknown model kind '" + std::string(s) + "'");
}

bool is_relative_target(std::string_view name) { return name.ends_with("_rel"); }

Predictor::Predictor(PredictorKind kind, std::vector<std::size_t> shape, std::size_t hidden, std::uint64_t seed)
    : kind_(kind), input_shape_(std::move(shape)), hidden_(hidden), seed_(seed) {
    const std::size_t n = input_size();
    if (kind_ == PredictorKind::linear) {
        if (n == 0) throw ShapeMismatch("linear model needs a non-empty input shape");
        params_.assign(n + 1, 0.0);
        std::mt19937_64 rng(seed);
        double a = 1.0 / std::sqrt(static_cast<double>(n));
        std::uniform_real_distribution<double> u(-a, a);
        for (std::size_t i = 0; i < n; ++i) params_[i] = u(rng);
    } else if (kind_ == PredictorKind::mlp) {
        if (n == 0) throw ShapeMismatch("mlp needs a non-empty input shape");
        if (hidden_ == 0) throw ValidationError("mlp hidden size must be positive");
        params_.assign(hidden_ * n + 2 * hidden_ + 1, 0.0);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u1(-std::sqrt(6.0 / static_cast<double>(n)), std::sqrt(6.0 / static_cast<double>(n)));
        for (std::size_t i = 0; i < hidden_ * n; ++i) params_[i] = u1(rng);
        std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(static_cast<double>(hidden_)), 1.0 / std::sqrt(static_cast<double>(hidden_)));
        for (std::size_t j = 0; j < hidden_; ++j) params_[hidden_ * n + hidden_ + j] = u2(rng);
    }
}

Predictor Predictor::persistence() { return Predictor(PredictorKind::persistence, {}, 0, 0); }
Predictor Predictor::null_half() { return Predictor(PredictorKind::null_half, {}, 0, 0); }

Predictor Predictor::linear(std::vector<std::size_t> input_shape, std::uint64_t seed) {
    return Predictor(PredictorKind::linear, std::move(input_shape), 0, seed);
}

Predictor Predictor::mlp(std::vector<std::size_t> input_shape, std::size_t hidden, std::uint64_t seed) {
    return Predictor(PredictorKind::mlp, std::move(input_shape), hidden, seed);
}

Predictor Predictor::make(PredictorKind kind, std::vector<std::size_t> input_shape, std::size_t hidden, std::uint64_t seed) {
    switch (kind) {
    case PredictorKind::persistence: return persistence();
    case PredictorKind::null_half: return null_half();
    case PredictorKind::linear: return linear(std::move(input_shape), seed);
    case PredictorKind::mlp: return mlp(std::move(input_shape), hidden, seed);
    }
    throw ValidationError("unknown model kind");
}

std::size_t Predictor::input_size() const {
    if (input_shape_.empty()) return 0;
    std::size_t n = 1;
    for (auto d : input_shape_) n *= d;
    return n;
}

void Predictor::set_parameters(std::vector<double> p) {
    if (p.size() != params_.size())
        throw ShapeMismatch(fmt::format("expected {} parameters, got {}", params_.size(), p.size()));
    params_ = std::move(p);
}

double Predictor::forward(std::span<const double> x) const {
    const std::size_t n = input_size();
    switch (kind_) {
    case PredictorKind::null_half: return 0.5;
    case PredictorKind::persistence: throw ValidationError("persistence needs dataset context; use predict()");
    case PredictorKind::linear: {
        if (x.size() != n) throw ShapeMismatch(fmt::format("input has {} values, model expects {}", x.size(), n));
        double s = params_[n];
        for (std::size_t i = 0; i < n; ++i) s += params_[i] * x[i];
        return s;
    }
    case PredictorKind::mlp: {
        if (x.size() != n) throw ShapeMismatch(fmt::format("input has {} values, model expects {}", x.size(), n));
        const double* w1 = params_.data();
        const double* b1 = w1 + hidden_ * n;
        const double* w2 = b1 + hidden_;
        double out = w2[hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) {
            double h = b1[j];
            const double* row = w1 + j * n;
            for (std::size_t i = 0; i < n; ++i) h += row[i] * x[i];
            if (h > 0) out += w2[j] * h;
        }
        return out;
    }
    }
    return 0;
}

void Predictor::check_input(const Dataset& ds) const {
    if (!trainable()) return;
    if (ds.input_shape != input_shape_)
        throw ShapeMismatch(fmt::format("dataset sample has {} values, model expects {}", ds.sample_size(), input_size()));
}

double Predictor::predict(const Dataset& ds, std::size_t i) const {
    if (kind_ == PredictorKind::persistence) {
        if (is_relative_target(ds.target_name)) return datasetgen::apply(ds.target_params, 0.0);
        auto k = ds.property_index(ds.target_name);
        if (!k || !ds.properties[*k].shape.scalar()) throw TargetNotInWindow(ds.target_name);
        double last = ds.sample(i)[ds.offset_of(*k, 0, 0, ds.wn - 1)];
        double raw = datasetgen::invert(ds.properties[*k].params, last);
        return datasetgen::apply(ds.target_params, raw);
    }
    if (kind_ == PredictorKind::null_half) return 0.5;
    check_input(ds);
    return forward(ds.sample(i));
}

double Predictor::loss(const Dataset& ds, std::span<const std::size_t> batch) const {
    if (batch.empty()) return 0;
    double s = 0;
    for (auto i : batch) {
        double e = predict(ds, i) - ds.targets[i];
        s += e * e;
    }
    return s / static_cast<double>(batch.size());
}

double Predictor::loss_and_gradient(const Dataset& ds, std::span<const std::size_t> batch, std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    if (!trainable()) return loss(ds, batch);
    check_input(ds);
    if (batch.empty()) return 0;
    const std::size_t n = input_size();
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0;

    if (kind_ == PredictorKind::linear) {
        for (auto idx : batch) {
            auto x = ds.sample(idx);
            double e = forward(x) - ds.targets[idx];
            total += e * e;
            double g = 2 * e * inv_b;
            for (std::size_t i = 0; i < n; ++i) grad[i] += g * x[i];
            grad[n] += g;
        }
        return total * inv_b;
    }

    const double* w1 = params_.data();
    const double* b1 = w1 + hidden_ * n;
    const double* w2 = b1 + hidden_;
    double* gw1 = grad.data();
    double* gb1 = gw1 + hidden_ * n;
    double* gw2 = gb1 + hidden_;
    std::vector<double> h(hidden_);
    for (auto idx : batch) {
        auto x = ds.sample(idx);
        double out = w2[hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) {
            double a = b1[j];
            const double* row = w1 + j * n;
            for (std::size_t i = 0; i < n; ++i) a += row[i] * x[i];
            h[j] = a > 0 ? a : 0;
            out += w2[j] * h[j];
        }
        double e = out - ds.targets[idx];
        total += e * e;
        double g = 2 * e * inv_b;
        gw2[hidden_] += g;
        for (std::size_t j = 0; j < hidden_; ++j) {
            gw2[j] += g * h[j];
            if (h[j] <= 0) continue;
            double gj = g * w2[j];
            gb1[j] += gj;
            double* grow = gw1 + j * n;
            for (std::size_t i = 0; i < n; ++i) grow[i] += gj * x[i];
        }
    }
    return total * inv_b;
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ValidationError("batch size must be positive");
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ValidationError("learning rate must be positive");
    if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1))
        throw ValidationError("adam betas must lie in [0, 1)");
    if (!(adam_eps > 0)) throw ValidationError("adam epsilon must be positive");
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, const TrainConfig& config) {
    if (grads.size() != params.size())
        throw ShapeMismatch(fmt::format("gradient has {} entries, parameters {}", grads.size(), params.size()));
    for (double g : grads)
        if (!std::isfinite(g)) throw NonFiniteGradient();
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double c1 = 1 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1 - b2) * grads[i] * grads[i];
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
}

namespace {

// On/off state of every hidden unit for every sample of the batch.
std::vector<bool> relu_pattern(const Predictor& p, const Dataset& ds, std::span<const std::size_t> batch) {
    std::vector<bool> out;
    if (p.kind() != PredictorKind::mlp) return out;
    const std::size_t n = p.input_size(), hidden = p.hidden();
    const double* w1 = p.parameters().data();
    const double* b1 = w1 + hidden * n;
    out.reserve(batch.size() * hidden);
    for (auto idx : batch) {
        auto x = ds.sample(idx);
        for (std::size_t j = 0; j < hidden; ++j) {
            double a = b1[j];
            for (std::size_t i = 0; i < n; ++i) a += w1[j * n + i] * x[i];
            out.push_back(a > 0);
        }
    }
    return out;
}

} // namespace

double gradient_check(const Predictor& p, const Dataset& ds, std::span<const std::size_t> batch) {
    std::vector<double> analytic;
    p.loss_and_gradient(ds, batch, analytic);
    constexpr double h = 1e-4;
    Predictor probe = p;
    const auto pattern = relu_pattern(p, ds, batch);
    double worst = 0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        double orig = probe.parameters()[k];
        probe.parameters()[k] = orig + h;
        double up = probe.loss(ds, batch);
        bool kink = relu_pattern(probe, ds, batch) != pattern;
        probe.parameters()[k] = orig - h;
        double down = probe.loss(ds, batch);
        kink = kink || relu_pattern(probe, ds, batch) != pattern;
        probe.parameters()[k] = orig;
        // the loss is not differentiable across a unit switching on or off
        if (kink) continue;
        double numeric = (up - down) / (2 * h);
        double a = analytic[k];
        double scale = std::max(std::abs(a), std::abs(numeric));
        if (scale < 1e-10) continue;
        worst = std::max(worst, std::abs(a - numeric) / scale);
    }
    return worst;
}

TrainResult train(Predictor& p, const Dataset& train_set, const TrainConfig& config, const Dataset* select_on) {
    config.validate();
    if (train_set.empty()) throw EmptyDataset();
    TrainResult result;
    if (!p.trainable() || config.epochs == 0) return result;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    AdamState state;
    std::vector<double> grad;
    std::vector<double> best_params;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t len = std::min(config.batch_size, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            double l = p.loss_and_gradient(train_set, batch, grad);
            sum += l * static_cast<double>(len);
            adam_step(p.parameters(), grad, state, config);
        }
        double epoch_loss = sum / static_cast<double>(order.size());
        result.loss_history.push_back(epoch_loss);

        double score = select_on ? evaluate(p, *select_on).mse : epoch_loss;
        if (!result.best_epoch || score < result.best_score) {
            result.best_epoch = epoch;
            result.best_score = score;
            best_params = p.parameters();
        }
    }
    if (!best_params.empty()) p.set_parameters(std::move(best_params));
    return result;
}

double mean_squared_error(std::span<const double> out, std::span<const double> truth) {
    if (out.size() != truth.size()) throw ShapeMismatch("prediction and truth lengths differ");
    if (out.empty()) return 0;
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += (out[i] - truth[i]) * (out[i] - truth[i]);
    return s / static_cast<double>(out.size());
}

double r2_null_half(std::span<const double> out_norm, std::span<const double> true_norm) {
    if (out_norm.size() != true_norm.size()) throw ShapeMismatch("prediction and truth lengths differ");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < out_norm.size(); ++i) {
        num += (true_norm[i] - out_norm[i]) * (true_norm[i] - out_norm[i]);
        den += (0.5 - true_norm[i]) * (0.5 - true_norm[i]);
    }
    if (den == 0) return num == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return 1 - num / den;
}

double r2_mean_baseline(std::span<const double> out, std::span<const double> truth) {
    if (out.size() != truth.size()) throw ShapeMismatch("prediction and truth lengths differ");
    if (truth.empty()) return 0;
    double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double sse = 0, sst = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        sse += (truth[i] - out[i]) * (truth[i] - out[i]);
        sst += (truth[i] - mean) * (truth[i] - mean);
    }
    if (sst == 0) return sse == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return 1 - sse / sst;
}

namespace {

int sgn(double x) { return (x > 0) - (x < 0); }

} // namespace

double sign_accuracy(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw ShapeMismatch("prediction and truth lengths differ");
    if (predicted.empty()) return 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += sgn(predicted[i]) == sgn(actual[i]);
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Predictions predict_all(const Predictor& p, const Dataset& ds) {
    Predictions out;
    out.relative_target = is_relative_target(ds.target_name);
    out.times = ds.times;
    out.actual_norm = ds.targets;
    out.predicted_norm.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.predicted_norm.push_back(p.predict(ds, i));
    out.predicted = datasetgen::inverse_normalize(out.predicted_norm, ds.target_params);
    out.actual = datasetgen::inverse_normalize(out.actual_norm, ds.target_params);
    return out;
}

MetricsReport compute_metrics(const Predictions& preds) {
    MetricsReport m;
    m.n = preds.predicted.size();
    if (m.n == 0) throw EmptyDataset();
    m.mse = mean_squared_error(preds.predicted, preds.actual);
    m.rmse = std::sqrt(m.mse);
    m.r2 = r2_null_half(preds.predicted_norm, preds.actual_norm);
    m.r2_mean = r2_mean_baseline(preds.predicted, preds.actual);
    if (preds.relative_target) {
        m.sign = sign_accuracy(preds.predicted, preds.actual);
        m.sign_n = m.n;
    } else if (m.n > 1) {
        std::vector<double> dp, da;
        dp.reserve(m.n - 1);
        da.reserve(m.n - 1);
        for (std::size_t i = 1; i < m.n; ++i) {
            dp.push_back(preds.predicted[i] - preds.predicted[i - 1]);
            da.push_back(preds.actual[i] - preds.actual[i - 1]);
        }
        m.sign = sign_accuracy(dp, da);
        m.sign_n = m.n - 1;
    }
    return m;
}

MetricsReport evaluate(const Predictor& p, const Dataset& ds) { return compute_metrics(predict_all(p, ds)); }

void export_predictions(const Predictor& p, const Dataset& ds, const std::filesystem::path& path) {
    auto preds = predict_all(p, ds);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "time,predicted,actual\n";
    for (std::size_t i = 0; i < preds.times.size(); ++i)
        out << fmt::format("{},{:.17g},{:.17g}\n", preds.times[i], preds.predicted[i], preds.actual[i]);
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

constexpr std::string_view checkpoint_magic = "BPM1";

} // namespace

std::string encode_checkpoint(const Predictor& p) {
    json header = {{"kind", to_string(p.kind())},
                   {"input_shape", p.input_shape()},
                   {"hidden", p.hidden()},
                   {"seed", p.seed()},
                   {"param_count", p.parameters().size()}};
    std::string h = header.dump();
    std::string out(checkpoint_magic);
    bytes::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
    out += h;
    for (double v : p.parameters()) bytes::append_le<double>(out, v);
    return out;
}

Predictor decode_checkpoint(std::string_view data) {
    if (data.size() < checkpoint_magic.size() || data.substr(0, checkpoint_magic.size()) != checkpoint_magic)
        throw BadMagic("not a model checkpoint (bad magic)");
    bytes::Reader r(data.substr(checkpoint_magic.size()));
    auto len = r.read_le<std::uint32_t>();
    json h = json::parse(r.take(len), nullptr, false);
    if (h.is_discarded() || !h.is_object()) throw ValidationError("checkpoint header is not a JSON object");
    try {
        auto kind = parse_predictor_kind(h.at("kind").get<std::string>());
        auto p = Predictor::make(kind, h.at("input_shape").get<std::vector<std::size_t>>(), h.at("hidden").get<std::size_t>(),
                                 h.at("seed").get<std::uint64_t>());
        auto count = h.at("param_count").get<std::size_t>();
        if (count != p.parameters().size())
            throw ShapeMismatch(fmt::format("checkpoint has {} parameters, model needs {}", count, p.parameters().size()));
        std::vector<double> params(count);
        for (auto& v : params) v = r.read_le<double>();
        if (!r.done()) throw ValidationError(fmt::format("checkpoint has {} trailing bytes", r.remaining()));
        p.set_parameters(std::move(params));
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint header: ") + e.what());
    }
}

void write_checkpoint(const Predictor& p, const std::filesystem::path& path) {
    auto bytes = encode_checkpoint(p);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Predictor read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_checkpoint(ss.str());
}

} // namespace chainsight::modeling
