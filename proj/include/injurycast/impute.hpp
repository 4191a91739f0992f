#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/ingest.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

enum class ImputeMethod { none, median, bespoke, linear };

std::string_view to_string(ImputeMethod m);
std::optional<ImputeMethod> impute_method_from_string(std::string_view s);

/// Fills each gap with the player's median for that feature (even count: mean of
/// the two middle values). Features a player never observed stay missing.
FeaturePanel impute_median(const FeaturePanel& panel);

/// Relative-standing imputation. For a missing (player, day, feature) cell the
/// player's standing is the mean z-score against teammates over the preceding
/// `window` days, counting only days where the player and at least two teammates
/// were observed (and the teammates' spread is nonzero). The gap becomes
/// team_mean + standing * team_sd on the missing day, using population SD over the
/// teammates observed that day. Cells without two teammates that day or without any
/// usable day in the window stay missing.
FeaturePanel impute_relative_standing(const FeaturePanel& panel, int window = 14);

/// Interior gaps filled by linear interpolation in calendar time; no extrapolation.
FeaturePanel impute_linear(const FeaturePanel& panel);

FeaturePanel impute(const FeaturePanel& panel, ImputeMethod method);

struct FeatureDiagnostics {
    std::string feature;
    double fraction_missing_before = 0.0;
    double fraction_missing_after = 0.0;
    /// Two-sample Kolmogorov-Smirnov distance, observed vs post-imputation values.
    std::optional<double> ks_distance;
    /// Point-biserial correlation with an injury on the following day.
    std::optional<double> injury_corr_before;
    std::optional<double> injury_corr_after;
};

struct ImputationDiagnostics {
    std::vector<FeatureDiagnostics> features;
};

/// `before` and `after` must share players, dates and feature names.
ImputationDiagnostics diagnostics(const FeaturePanel& before, const FeaturePanel& after,
                                  std::span<const InjuryEvent> injuries);

/// sup |F_a - F_b| over the pooled sample; nullopt if either side is empty.
std::optional<double> ks_distance(std::span<const double> a, std::span<const double> b);

std::string diagnostics_csv(const ImputationDiagnostics& diag);

struct DropResult {
    FeaturePanel panel;
    std::vector<std::string> dropped;
};

/// Removes features whose missing fraction exceeds `threshold`.
DropResult drop_high_missingness(const FeaturePanel& panel, double threshold = 0.5);

}  // namespace injurycast
