#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chainsight/dataset.hpp"

namespace chainsight::modeling {

using datasetgen::Dataset;

enum class PredictorKind { persistence, null_half, linear, mlp };

std::string_view to_string(PredictorKind k);
PredictorKind parse_predictor_kind(std::string_view s);

// Baseline predictors behind one interface. All outputs live in the target's
// normalized space; evaluation inverts them.
//
//   persistence  last windowed value of the target property (0 in target
//                scale for relative targets)
//   null_half    constant 0.5
//   linear       w . x + b
//   mlp          w2 . relu(W1 x + b1) + b2
//
// Parameter layout: linear [w(n), b]; mlp [W1(hidden x n), b1(hidden), w2(hidden), b2].
class Predictor {
  public:
    static Predictor persistence();
    static Predictor null_half();
    static Predictor linear(std::vector<std::size_t> input_shape, std::uint64_t seed = 0);
    static Predictor mlp(std::vector<std::size_t> input_shape, std::size_t hidden = 64, std::uint64_t seed = 0);
    static Predictor make(PredictorKind kind, std::vector<std::size_t> input_shape, std::size_t hidden, std::uint64_t seed);

    PredictorKind kind() const { return kind_; }
    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    std::size_t input_size() const;
    std::size_t hidden() const { return hidden_; }
    std::uint64_t seed() const { return seed_; }
    bool trainable() const { return kind_ == PredictorKind::linear || kind_ == PredictorKind::mlp; }

    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    void set_parameters(std::vector<double> p);

    // Trainable kinds only; ShapeMismatch on a wrong input length.
    double forward(std::span<const double> x) const;

    // Normalized-space prediction for sample i. Persistence throws
    // TargetNotInWindow when an absolute target is not among the inputs.
    double predict(const Dataset& ds, std::size_t i) const;

    // Mean squared error over the batch and its gradient w.r.t. parameters.
    double loss_and_gradient(const Dataset& ds, std::span<const std::size_t> batch, std::vector<double>& grad) const;
    double loss(const Dataset& ds, std::span<const std::size_t> batch) const;

  private:
    Predictor(PredictorKind kind, std::vector<std::size_t> shape, std::size_t hidden, std::uint64_t seed);
    void check_input(const Dataset& ds) const;

    PredictorKind kind_;
    std::vector<std::size_t> input_shape_;
    std::size_t hidden_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> params_;
};

bool is_relative_target(std::string_view name);

struct TrainConfig {
    std::size_t batch_size = 16;
    double learning_rate = 1e-5;
    std::size_t epochs = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

// One bias-corrected Adam update. NonFiniteGradient if any gradient is NaN/inf.
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state, const TrainConfig& config);

// Max relative error between the analytic gradient and central differences
// (h = 1e-4) over all parameters. Pairs where both sides are below 1e-10 count as 0;
// mlp coordinates whose probes switch a hidden unit on or off are skipped.
double gradient_check(const Predictor& p, const Dataset& ds, std::span<const std::size_t> batch);

struct TrainResult {
    std::vector<double> loss_history; // mean per-sample loss of each epoch
    std::optional<std::size_t> best_epoch;
    double best_score = 0; // selection MSE of best_epoch
};

// Minibatch Adam over seeded shuffles. The parameters of the best epoch are
// kept: by MSE on `select_on` when given (an optimistic protocol when that is
// the test set), else by training loss.
TrainResult train(Predictor& p, const Dataset& train_set, const TrainConfig& config, const Dataset* select_on = nullptr);

struct MetricsReport {
    double mse = 0;
    double rmse = 0;
    double r2 = 0;      // 1 - sum err^2 / sum (0.5 - true)^2, normalized space
    double r2_mean = 0; // 1 - SSE / SST, original scale
    double sign = 0;
    std::size_t n = 0;
    std::size_t sign_n = 0;
};

double mean_squared_error(std::span<const double> out, std::span<const double> truth);
double r2_null_half(std::span<const double> out_norm, std::span<const double> true_norm);
double r2_mean_baseline(std::span<const double> out, std::span<const double> truth);
// Fraction of positions where sign(predicted) == sign(actual), zero included.
double sign_accuracy(std::span<const double> predicted, std::span<const double> actual);

struct Predictions {
    std::vector<Timestamp> times;
    std::vector<double> predicted_norm;
    std::vector<double> actual_norm;
    std::vector<double> predicted; // original scale
    std::vector<double> actual;
    bool relative_target = false;
};

Predictions predict_all(const Predictor& p, const Dataset& ds);

// Metrics of a prediction set. Relative targets compare signs directly;
// absolute targets compare the step-to-step change of the prediction with the
// change of the true value over consecutive samples.
MetricsReport compute_metrics(const Predictions& preds);
MetricsReport evaluate(const Predictor& p, const Dataset& ds);

// CSV "time,predicted,actual" in original scale, 17 significant digits.
void export_predictions(const Predictor& p, const Dataset& ds, const std::filesystem::path& path);

// "BPM1" | u32 LE header length | JSON {kind, input_shape, hidden, seed,
// param_count} | f64 LE parameters.
std::string encode_checkpoint(const Predictor& p);
Predictor decode_checkpoint(std::string_view bytes);
void write_checkpoint(const Predictor& p, const std::filesystem::path& path);
Predictor read_checkpoint(const std::filesystem::path& path);

} // namespace chainsight::modeling
