#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/date.hpp"
#include "injurycast/ingest.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

struct SynthFeature {
    Field field;
    double mean = 0.0;
    double sd = 1.0;
    double lo = 0.0;  // physiological clamp
    double hi = 0.0;
    double weight = 0.0;  // log-odds per marginal SD
};

/// Ground-truth generating process for a synthetic cohort.
struct HazardSpec {
    double base_rate = 0.001;
    std::vector<SynthFeature> features;
    /// Measurement noise added to reported values, in marginal-SD units.
    double noise_sd = 0.3;
    /// AR(1) coefficient of the within-player latent trajectories.
    double persistence = 0.97;
    /// Share of each feature's variance carried by a fixed per-player offset.
    double player_offset_share = 0.5;
    /// Daily probability that the wellness/session questionnaire is missing.
    double subjective_missing_rate = 0.2;
    /// Daily probability that no tracking data is recorded.
    double objective_missing_rate = 0.15;
    std::uint64_t seed = 42;
};

/// Three hazard-driving features (stress, soreness, high-intensity running distance)
/// at weight 1 and ten zero-weight features.
HazardSpec default_hazard_spec();

/// Throws ConfigError listing all problems.
void validate(const HazardSpec& spec);

struct SynthCohort {
    /// Latent values driving the hazard (complete, clamped).
    FeaturePanel truth;
    /// Reported values: truth plus measurement noise, with injected missingness.
    FeaturePanel panel;
    /// One monitoring record per player-day with any reported value.
    std::vector<PlayerDay> records;
    std::vector<InjuryEvent> injuries;
};

/// Deterministic given spec.seed. Requires n_players >= 2.
SynthCohort generate(int n_players, int n_days, const HazardSpec& spec,
                     Date start = Date::from_ymd(2020, 1, 1));

/// Daily injury probability logistic(logit(base) + sum_f w_f (v_f - mean_f) / sd_f)
/// on the truth panel. Same code path as generate().
double oracle_risk(const HazardSpec& spec, const FeaturePanel& truth, std::string_view player,
                   Date date);

/// Probability of at least one injury in (anchor, anchor + horizon] under the true
/// daily hazards; days outside the track contribute nothing.
double oracle_horizon_risk(const HazardSpec& spec, const FeaturePanel& truth,
                           std::string_view player, Date anchor, int horizon);

}  // namespace injurycast
