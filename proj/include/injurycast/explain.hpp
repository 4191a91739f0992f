#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/date.hpp"
#include "injurycast/deephit.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

using ScoreFn = std::function<double(std::span<const double>)>;

struct Attribution {
    std::string player_id;
    Date date;
    double base_value = 0.0;
    std::vector<double> phi;
    double prediction = 0.0;
    std::vector<std::string> feature_names;
};

struct ShapOptions {
    /// Coalition budget for the sampling estimator (ignored for exact enumeration).
    int n_coalitions = 2048;
    /// Exact enumeration up to this many features.
    int exact_max_features = 12;
    std::uint64_t seed = 2024;
};

/// Kernel Shapley values of `score` at `x`. Absent features are marginalized by
/// averaging over the background rows. Up to `exact_max_features` features every
/// coalition is enumerated; beyond that coalition sizes are enumerated while the
/// budget allows and the rest sampled in complementary pairs, then solved by
/// weighted least squares constrained to local accuracy.
/// Throws std::invalid_argument for an empty background.
Attribution kernel_shap(const ScoreFn& score, std::span<const double> x,
                        const std::vector<std::vector<double>>& background,
                        const ShapOptions& opt = {});

/// Features ranked by |phi| (descending), ties by name. k larger than the feature
/// count returns all.
std::vector<std::pair<std::string, double>> top_features(const Attribution& a, std::size_t k);

struct FeatureImportance {
    std::string feature;
    double mean_abs_phi = 0.0;
};

/// `background` holds standardized model inputs (typically training rows).
struct ExplainContext {
    const DeepHitModel& model;
    std::vector<std::vector<double>> background;
    ShapOptions options;
};

/// Uniform sample of at most `n` rows drawn without replacement.
std::vector<std::vector<double>> sample_background(const std::vector<std::vector<double>>& rows,
                                                   std::size_t n, std::uint64_t seed);

/// Attribution of the model's risk score for one player-day (standardized space).
Attribution day_explanation(const ExplainContext& ctx, const FeaturePanel& panel,
                            std::string_view player, Date date);

/// Mean |phi| over all eligible anchor dates, descending, ties by name.
std::vector<FeatureImportance> season_importance(const ExplainContext& ctx,
                                                 const FeaturePanel& panel,
                                                 std::string_view player);

}  // namespace injurycast
