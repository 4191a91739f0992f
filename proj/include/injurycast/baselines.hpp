#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "injurycast/cohort.hpp"
#include "injurycast/metrics.hpp"
#include "injurycast/panel.hpp"
#include "injurycast/trees.hpp"

namespace injurycast {

enum class Family { logreg, random_forest, gbt };

std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);

using HyperParams = std::map<std::string, double>;
using GridSpec = std::map<std::string, std::vector<double>>;

struct ScorerWeights {
    double f1 = 0.4;
    double recall = 0.3;
    double precision = 0.15;
    double auc = 0.15;
};

/// Throws ConfigError unless all weights are >= 0 and sum to 1.
void validate(const ScorerWeights& w);

/// w_f1*F1 + w_rec*recall + w_prec*precision + w_auc*AUC; incomputable metrics score 0.
double weighted_score(const BinaryMetrics& m, const ScorerWeights& w = {});

// --- logistic regression ----------------------------------------------------

struct LogisticRegression {
    std::vector<double> weights;
    double bias = 0.0;
    double predict_proba(std::span<const double> x) const;
};

/// Mean log-loss plus (l2 / 2) * |w|^2 (bias unpenalized).
double logreg_objective(const LogisticRegression& m, const std::vector<BinarySample>& samples,
                        double l2);
/// Gradient of logreg_objective: weights first, bias last.
std::vector<double> logreg_gradient(const LogisticRegression& m,
                                    const std::vector<BinarySample>& samples, double l2);

/// Full-batch proximal gradient descent from zero weights; the L2 shrinkage is
/// applied implicitly so any l2 >= 0 is stable. Deterministic; `seed` is unused.
LogisticRegression train_logreg(const std::vector<BinarySample>& samples, double l2, double lr,
                                int epochs, std::uint64_t seed);

// --- random forest ------------------------------------------------------------

struct RandomForestParams {
    int n_trees = 100;
    int max_depth = 8;
    int min_leaf = 5;
    int features_per_split = 0;  // 0: round(sqrt(n_features))
    bool bootstrap = true;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::vector<double> importance;  // normalized impurity decrease
    double predict_proba(std::span<const double> x) const;
};

/// Tree i is grown from a generator seeded with mix_seed(seed, i).
RandomForest train_random_forest(const std::vector<BinarySample>& samples,
                                 const RandomForestParams& params, std::uint64_t seed);

// --- gradient boosting --------------------------------------------------------

struct GbtParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double lambda = 1.0;
    double min_child_weight = 1e-3;
    int min_leaf = 1;
};

struct GradientBoostedTrees {
    double base_margin = 0.0;
    double learning_rate = 0.1;
    std::vector<DecisionTree> trees;
    std::vector<double> importance;  // normalized total gain
    /// Training log-loss before any tree and after each round.
    std::vector<double> loss_path;
    double margin(std::span<const double> x) const;
    double predict_proba(std::span<const double> x) const;
};

/// Logistic-loss boosting with second-order (Newton) leaf weights.
GradientBoostedTrees train_gbt(const std::vector<BinarySample>& samples, const GbtParams& params,
                               std::uint64_t seed);

// --- family-agnostic wrapper --------------------------------------------------

/// Any baseline together with the standardizer fitted on its training rows.
class Classifier {
public:
    using Model = std::variant<LogisticRegression, RandomForest, GradientBoostedTrees>;
    Classifier(Family family, ScalerStats scaler, Model model);

    Family family() const { return family_; }
    const Model& model() const { return model_; }
    double predict_proba(std::span<const double> raw) const;
    /// |weight| for logistic regression, impurity/gain importance for trees.
    std::vector<double> importances() const;

private:
    Family family_;
    ScalerStats scaler_;
    Model model_;
};

HyperParams default_params(Family family);
GridSpec default_grid(Family family);

/// Unknown keys raise ConfigError; missing keys take defaults.
Classifier fit_classifier(Family family, const HyperParams& params,
                          const std::vector<BinarySample>& train, std::uint64_t seed);

/// Chronological train/validation split with the training side oversampled.
struct EvaluationSplit {
    std::vector<BinarySample> train;
    std::vector<BinarySample> valid;
};

EvaluationSplit make_evaluation_split(const std::vector<BinarySample>& samples, double fraction,
                                      std::uint64_t seed);

BinaryMetrics evaluate_classifier(const Classifier& c, const std::vector<BinarySample>& rows);

/// Copies of the samples restricted to the given columns.
std::vector<BinarySample> project(const std::vector<BinarySample>& samples,
                                  const std::vector<std::size_t>& features);

struct LeaderboardEntry {
    HyperParams config;
    BinaryMetrics metrics;
    double score = 0.0;
    std::size_t n_features = 0;
};

struct GridResult {
    HyperParams best;
    /// Ranked: score desc, then F1 desc, fewer features, lexicographic config.
    std::vector<LeaderboardEntry> leaderboard;
};

GridResult grid_search(Family family, const GridSpec& grid, const EvaluationSplit& split,
                       const ScorerWeights& weights, std::uint64_t seed);

std::string leaderboard_csv(const GridResult& result);

struct SelectionResult {
    std::vector<std::size_t> features;  // in order of addition
    std::vector<double> score_path;     // score of the empty set, then after each addition
};

/// Forward selection from the empty set, stopping when no addition improves the
/// validation score.
SelectionResult greedy_forward_select(Family family, const HyperParams& params,
                                      const EvaluationSplit& split, const ScorerWeights& weights,
                                      std::uint64_t seed);

struct EliminationResult {
    std::vector<std::size_t> eliminated;  // original column indices, first dropped first
    std::vector<double> score_path;       // score before each elimination and at the end
};

/// Recursive elimination of the least important feature, `step` at a time, until
/// one feature remains.
EliminationResult rfe(Family family, const HyperParams& params, const EvaluationSplit& split,
                      const ScorerWeights& weights, std::uint64_t seed, int step = 1);

struct WindowResult {
    int lookback = 0;
    int horizon = 0;
    BinaryMetrics metrics;
    double score = 0.0;
    /// Set when the held-out side lacks a class (metrics undefined) or the split failed.
    bool flagged = false;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

/// Every (lookback, horizon) pair over `windows`.
std::vector<WindowResult> window_sweep(Family family, const HyperParams& params,
                                       const FeaturePanel& panel,
                                       std::span<const InjuryEvent> injuries,
                                       const std::vector<int>& windows, double fraction,
                                       const ScorerWeights& weights, std::uint64_t seed);

std::string window_sweep_csv(const std::vector<WindowResult>& rows);

}  // namespace injurycast
