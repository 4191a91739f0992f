#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "injurycast/date.hpp"
#include "injurycast/errors.hpp"
#include "injurycast/ingest.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

struct SurvivalSample {
    std::string player_id;
    Date anchor_date;
    /// Look-back aggregate; NaN where the window had no observation.
    std::vector<double> x;
    int time_to_event = 0;  // 1..horizon
    int event = 0;          // 1 = injury, 0 = censored
};

struct BinarySample {
    std::string player_id;
    Date anchor_date;
    std::vector<double> x;
    int label = 0;
};

struct SurvivalOptions {
    int lookback = 21;
    int horizon = 7;
    /// Anchors on an injury day and this many days after it are skipped.
    int post_injury_exclusion = 7;
};

/// Discrete time-to-event samples. Anchor t needs `lookback` days of history in the
/// player's track. Next injury at t+k: k <= horizon gives (k, 1); otherwise
/// (min(horizon, days left in track), 0). Anchors with no day left are dropped.
std::vector<SurvivalSample> build_survival_samples(const FeaturePanel& panel,
                                                   std::span<const InjuryEvent> injuries,
                                                   const SurvivalOptions& opt = {});

/// x = trailing means over `lookback`; label = injury in (t, t + horizon]. Anchors
/// whose horizon runs past the end of the track are kept only when positive.
std::vector<BinarySample> build_binary_samples(const FeaturePanel& panel,
                                               std::span<const InjuryEvent> injuries,
                                               int lookback, int horizon);

struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> sd;  // population SD
};

/// Per-column mean and population SD over finite entries.
ScalerStats fit_scaler(std::span<const std::vector<double>> rows);
/// (v - mean) / sd; zero-SD columns and missing (NaN) entries map to 0.
std::vector<double> apply_scaler(const ScalerStats& stats, std::span<const double> row);

template <typename Sample>
void apply_scaler_inplace(const ScalerStats& stats, std::vector<Sample>& samples) {
    for (auto& s : samples) s.x = apply_scaler(stats, s.x);
}

template <typename Sample>
ScalerStats fit_scaler_on(const std::vector<Sample>& samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(s.x);
    return fit_scaler(rows);
}

template <typename Sample>
struct Split {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

/// Sorts by anchor date and sends the first ceil(fraction * n) samples to train,
/// extended to include every sample sharing the boundary date. Throws ConfigError
/// when the test side would be empty.
template <typename Sample>
Split<Sample> chronological_split(std::vector<Sample> samples, double fraction = 0.8) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must lie in (0, 1)");
    if (samples.empty()) throw ConfigError("cannot split an empty sample set");
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& a, const Sample& b) { return a.anchor_date < b.anchor_date; });
    const auto n = samples.size();
    auto cut = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    cut = std::clamp<std::size_t>(cut, 1, n);
    const Date boundary = samples[cut - 1].anchor_date;
    while (cut < n && samples[cut].anchor_date == boundary) ++cut;
    if (cut == n)
        throw ConfigError("chronological split leaves no test dates (all anchors share the boundary)");
    Split<Sample> out;
    out.train.assign(std::make_move_iterator(samples.begin()),
                     std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(cut)));
    out.test.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(cut)),
                    std::make_move_iterator(samples.end()));
    return out;
}

template <typename Sample>
struct Fold {
    std::string held_out;
    std::vector<Sample> train;
    std::vector<Sample> test;
};

/// One fold per distinct player (sorted by id).
template <typename Sample>
std::vector<Fold<Sample>> lopo_folds(const std::vector<Sample>& samples) {
    std::set<std::string> players;
    for (const auto& s : samples) players.insert(s.player_id);
    std::vector<Fold<Sample>> folds;
    folds.reserve(players.size());
    for (const auto& p : players) {
        Fold<Sample> f;
        f.held_out = p;
        for (const auto& s : samples) (s.player_id == p ? f.test : f.train).push_back(s);
        folds.push_back(std::move(f));
    }
    return folds;
}

struct OversampleResult {
    std::vector<BinarySample> samples;
    /// Set when there was nothing to oversample (no positives).
    bool degenerate = false;
};

/// Duplicates randomly drawn minority (positive) rows until classes balance.
/// Draws come from a generator seeded with `seed`.
OversampleResult oversample_minority(const std::vector<BinarySample>& train, std::uint64_t seed);

std::string survival_samples_csv(const std::vector<SurvivalSample>& samples,
                                 const std::vector<std::string>& feature_names);
std::string binary_samples_csv(const std::vector<BinarySample>& samples,
                               const std::vector<std::string>& feature_names);

}  // namespace injurycast
