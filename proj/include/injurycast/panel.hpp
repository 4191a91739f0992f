#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/date.hpp"

namespace injurycast {

/// One player's contiguous daily timeline. Cells are row-major (day, feature).
/// A missing cell holds NaN and has observed == 0; observed cells are always finite.
class PlayerTrack {
public:
    PlayerTrack(std::string player_id, Date first_date, std::size_t n_days, std::size_t n_features);

    const std::string& player_id() const { return player_id_; }
    Date first_date() const { return first_date_; }
    Date last_date() const { return first_date_ + static_cast<int>(n_days_) - 1; }
    std::size_t n_days() const { return n_days_; }
    std::size_t n_features() const { return n_features_; }

    /// Day offset of `d`, or nullopt if outside the track.
    std::optional<std::size_t> day_of(Date d) const;

    bool observed(std::size_t day, std::size_t feature) const {
        return observed_[day * n_features_ + feature] != 0;
    }
    /// NaN when missing.
    double value(std::size_t day, std::size_t feature) const {
        return values_[day * n_features_ + feature];
    }
    std::optional<double> get(std::size_t day, std::size_t feature) const {
        if (!observed(day, feature)) return std::nullopt;
        return value(day, feature);
    }

    /// Non-finite `v` clears the cell.
    void set(std::size_t day, std::size_t feature, double v);
    void clear(std::size_t day, std::size_t feature);

private:
    friend class FeaturePanel;
    std::string player_id_;
    Date first_date_;
    std::size_t n_days_;
    std::size_t n_features_;
    std::vector<double> values_;
    std::vector<std::uint8_t> observed_;
};

/// Player x date x feature matrix with an explicit missingness mask.
class FeaturePanel {
public:
    FeaturePanel() = default;
    /// Throws std::invalid_argument on duplicate names.
    explicit FeaturePanel(std::vector<std::string> feature_names);

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::size_t n_features() const { return feature_names_.size(); }
    std::size_t n_players() const { return tracks_.size(); }
    std::optional<std::size_t> feature_index(std::string_view name) const;
    std::optional<std::size_t> player_index(std::string_view id) const;

    /// Appends an all-missing track. Throws on duplicate player id.
    PlayerTrack& add_player(std::string player_id, Date first_date, std::size_t n_days);

    PlayerTrack& track(std::size_t p) { return tracks_[p]; }
    const PlayerTrack& track(std::size_t p) const { return tracks_[p]; }
    const std::vector<PlayerTrack>& tracks() const { return tracks_; }

    /// Lookup by calendar date; nullopt outside the player's track or when missing.
    std::optional<double> at(std::size_t p, Date d, std::size_t feature) const;

    std::size_t cell_count() const;
    double missing_fraction(std::size_t feature) const;

    /// Copy with only the given feature columns, in the given order.
    FeaturePanel select(const std::vector<std::size_t>& features) const;

    /// Earliest first date and latest last date across players.
    std::optional<std::pair<Date, Date>> date_range() const;

private:
    std::vector<std::string> feature_names_;
    std::vector<PlayerTrack> tracks_;
};

/// Wide export: player_id,date,<features>; empty cell = missing.
std::string panel_csv(const FeaturePanel& panel);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace injurycast
