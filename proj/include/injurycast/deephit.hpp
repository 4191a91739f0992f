#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/cohort.hpp"
#include "injurycast/date.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
std::optional<Activation> activation_from_string(std::string_view s);

struct MlpConfig {
    std::vector<int> hidden_widths{32};
    Activation activation = Activation::tanh;
    double dropout_rate = 0.3;
    double weight_init_scale = 1.0;
    std::uint64_t seed = 7;
};

struct DeepHitConfig {
    int bins = 7;
    double alpha = 1.0;  // likelihood weight
    double beta = 0.2;   // ranking weight
    double sigma = 0.1;  // ranking kernel width
    double learning_rate = 0.01;
    double lr_decay = 0.99;  // per-epoch multiplicative decay
    /// Decoupled L2 shrinkage of weight matrices applied in each step (not part of the loss).
    double weight_decay = 0.1;
    int batch_size = 64;
    int epochs = 100;
    int patience = 10;
    /// Trailing (chronological) share of the training rows held out for early stopping.
    double validation_fraction = 0.1;
    std::uint64_t seed = 11;
};

/// Throws ConfigError listing every violated constraint.
void validate(const MlpConfig& cfg);
void validate(const DeepHitConfig& cfg);

/// pmf has bins + 1 entries (the last is mass beyond the horizon); cif has bins entries.
struct RiskCurve {
    std::vector<double> pmf;
    std::vector<double> cif;
};

RiskCurve risk_curve_from_logits(std::span<const double> logits);

/// Probability of injury within the horizon (last CIF entry).
double risk_score(const RiskCurve& curve);

/// Dense layer, weight stored row-major as out x in.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weight;
    std::vector<double> bias;
};

/// MLP backbone with a (bins + 1)-way softmax head.
class DeepHitNet {
public:
    DeepHitNet() = default;
    /// Glorot-uniform weights scaled by cfg.weight_init_scale, zero biases.
    DeepHitNet(int input_dim, const MlpConfig& cfg, int bins);

    int input_dim() const { return input_dim_; }
    int bins() const { return bins_; }
    const MlpConfig& config() const { return cfg_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    /// Inference pass (dropout off). Throws std::invalid_argument on dimension mismatch.
    std::vector<double> logits(std::span<const double> x) const;
    RiskCurve forward(std::span<const double> x) const;

    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);
    std::size_t parameter_count() const;

private:
    MlpConfig cfg_;
    int input_dim_ = 0;
    int bins_ = 0;
    std::vector<DenseLayer> layers_;
};

struct LossValue {
    double total = 0.0;
    double nll = 0.0;   // batch mean
    double rank = 0.0;  // mean over valid pairs, 0 without pairs
    std::size_t pairs = 0;
};

/// alpha * NLL + beta * ranking loss on the batch. Throws on an empty batch.
LossValue loss(const DeepHitNet& net, std::span<const SurvivalSample> batch,
               const DeepHitConfig& cfg);

struct Gradients {
    std::vector<DenseLayer> layers;  // same shapes as the net
    LossValue value;

    std::vector<double> flat() const;
};

/// Exact gradient of `loss` (dropout off).
Gradients gradients(const DeepHitNet& net, std::span<const SurvivalSample> batch,
                    const DeepHitConfig& cfg);

/// Gradient with inverted dropout masks drawn from `rng`, as used during training.
Gradients gradients_with_dropout(const DeepHitNet& net, std::span<const SurvivalSample> batch,
                                 const DeepHitConfig& cfg, std::mt19937_64& rng);

struct TrainHistory {
    std::vector<double> train_loss;      // full-objective loss after each epoch
    std::vector<double> validation_nll;  // empty without a validation slice
    int best_epoch = -1;
};

struct TrainResult {
    DeepHitNet net;
    TrainHistory history;
};

/// Mini-batch gradient descent with an exponentially decaying step. Samples must
/// already be standardized. Early stopping monitors NLL on the chronologically last
/// validation_fraction of rows and restores the best epoch's weights.
/// Throws TrainingError without any event.
TrainResult train(std::span<const SurvivalSample> samples, const MlpConfig& mlp,
                  const DeepHitConfig& cfg);

/// Trained network bundled with everything needed to score raw panel rows.
struct DeepHitModel {
    DeepHitNet net;
    DeepHitConfig config;
    ScalerStats scaler;
    std::vector<std::string> feature_names;
    int lookback = 21;

    /// `aggregate` is the unscaled look-back feature vector.
    RiskCurve predict(std::span<const double> aggregate) const;
};

struct DailyRisk {
    Date date;
    RiskCurve curve;
};

/// One curve per anchor date with a full look-back window.
std::vector<DailyRisk> daily_risk_series(const DeepHitModel& model, const FeaturePanel& panel,
                                         std::string_view player);

std::string checkpoint_text(const DeepHitModel& model);
DeepHitModel parse_checkpoint(std::string_view text);
void save_checkpoint(const DeepHitModel& model, const std::filesystem::path& path);
/// Throws DataError when the stored feature order differs from `expected_features`.
DeepHitModel load_checkpoint(const std::filesystem::path& path,
                             const std::vector<std::string>& expected_features);

}  // namespace injurycast
