#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "injurycast/date.hpp"
#include "injurycast/ingest.hpp"
#include "injurycast/panel.hpp"

namespace injurycast {

/// Daily training load for one player on a contiguous calendar. A day without a
/// recorded load is a rest day and enters every window as 0. Windows ending before
/// the first recorded load are undefined.
class LoadSeries {
public:
    LoadSeries(Date first_date, std::vector<std::optional<double>> daily);

    Date first_date() const { return first_date_; }
    /// First date carrying a recorded load, if any.
    std::optional<Date> first_observed() const { return first_observed_; }
    /// Load on `d` with rest = 0 (including dates outside the calendar).
    double load_or_rest(Date d) const;

private:
    Date first_date_;
    std::vector<std::optional<double>> daily_;
    std::optional<Date> first_observed_;
};

/// Sum of present srpe values; nullopt if none present.
std::optional<double> daily_load(std::span<const PlayerDay> sessions_on_day);

std::optional<double> atl(const LoadSeries& s, Date d);
std::optional<double> weekly_load(const LoadSeries& s, Date d);
/// Mean / sample SD over the trailing week. Needs the whole week after the first
/// recorded load; undefined when the SD is zero.
std::optional<double> monotony(const LoadSeries& s, Date d);
std::optional<double> strain(const LoadSeries& s, Date d);
/// window must be 28 or 42.
std::optional<double> ctl(const LoadSeries& s, Date d, int window);
/// Coupled 7-day mean over 28-day mean.
std::optional<double> acwr(const LoadSeries& s, Date d);

/// Player's injuries strictly before `d`.
int past_injury_count(std::span<const InjuryEvent> injuries, std::string_view player, Date d);

/// Fraction of the trailing 7 days (clipped to the track) whose wellness
/// questionnaire is entirely missing. Requires the six wellness columns in the panel.
std::optional<double> subjective_missingness_7d(const FeaturePanel& panel, std::size_t player,
                                                Date d);

/// Per-feature trailing mean over observed cells; missing when a window has none.
FeaturePanel rolling_means(const FeaturePanel& panel, int window);

/// Names of the engineered columns appended after the raw fields.
const std::vector<std::string>& derived_feature_names();

/// Full feature panel: raw fields aggregated per day followed by the derived load,
/// injury-history and questionnaire-missingness columns. Players are sorted by id;
/// each track spans the player's first to last record.
FeaturePanel build_feature_panel(std::span<const PlayerDay> records,
                                 std::span<const InjuryEvent> injuries);

}  // namespace injurycast
