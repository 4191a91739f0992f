#include "injurycast/panel.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "injurycast/csv.hpp"

namespace injurycast {

PlayerTrack::PlayerTrack(std::string player_id, Date first_date, std::size_t n_days,
                         std::size_t n_features)
    : player_id_(std::move(player_id)),
      first_date_(first_date),
      n_days_(n_days),
      n_features_(n_features),
      values_(n_days * n_features, kMissing),
      observed_(n_days * n_features, 0) {}

std::optional<std::size_t> PlayerTrack::day_of(Date d) const {
    const int offset = d - first_date_;
    if (offset < 0 || static_cast<std::size_t>(offset) >= n_days_) return std::nullopt;
    return static_cast<std::size_t>(offset);
}

void PlayerTrack::set(std::size_t day, std::size_t feature, double v) {
    if (!std::isfinite(v)) {
        clear(day, feature);
        return;
    }
    values_[day * n_features_ + feature] = v;
    observed_[day * n_features_ + feature] = 1;
}

void PlayerTrack::clear(std::size_t day, std::size_t feature) {
    values_[day * n_features_ + feature] = kMissing;
    observed_[day * n_features_ + feature] = 0;
}

FeaturePanel::FeaturePanel(std::vector<std::string> feature_names)
    : feature_names_(std::move(feature_names)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : feature_names_)
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate feature name: " + n);
}

std::optional<std::size_t> FeaturePanel::feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names_.size(); ++i)
        if (feature_names_[i] == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> FeaturePanel::player_index(std::string_view id) const {
    for (std::size_t i = 0; i < tracks_.size(); ++i)
        if (tracks_[i].player_id() == id) return i;
    return std::nullopt;
}

PlayerTrack& FeaturePanel::add_player(std::string player_id, Date first_date, std::size_t n_days) {
    if (player_index(player_id)) throw std::invalid_argument("duplicate player: " + player_id);
    tracks_.emplace_back(std::move(player_id), first_date, n_days, feature_names_.size());
    return tracks_.back();
}

std::optional<double> FeaturePanel::at(std::size_t p, Date d, std::size_t feature) const {
    const auto day = tracks_[p].day_of(d);
    if (!day) return std::nullopt;
    return tracks_[p].get(*day, feature);
}

std::size_t FeaturePanel::cell_count() const {
    std::size_t n = 0;
    for (const auto& t : tracks_) n += t.n_days();
    return n;
}

double FeaturePanel::missing_fraction(std::size_t feature) const {
    std::size_t total = 0;
    std::size_t missing = 0;
    for (const auto& t : tracks_) {
        for (std::size_t d = 0; d < t.n_days(); ++d) {
            ++total;
            if (!t.observed(d, feature)) ++missing;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(total);
}

FeaturePanel FeaturePanel::select(const std::vector<std::size_t>& features) const {
    std::vector<std::string> names;
    names.reserve(features.size());
    for (auto f : features) names.push_back(feature_names_.at(f));
    FeaturePanel out(std::move(names));
    for (const auto& t : tracks_) {
        auto& dst = out.add_player(t.player_id(), t.first_date(), t.n_days());
        for (std::size_t d = 0; d < t.n_days(); ++d)
            for (std::size_t j = 0; j < features.size(); ++j)
                if (t.observed(d, features[j])) dst.set(d, j, t.value(d, features[j]));
    }
    return out;
}

std::optional<std::pair<Date, Date>> FeaturePanel::date_range() const {
    if (tracks_.empty()) return std::nullopt;
    Date lo = tracks_.front().first_date();
    Date hi = tracks_.front().last_date();
    for (const auto& t : tracks_) {
        lo = std::min(lo, t.first_date());
        hi = std::max(hi, t.last_date());
    }
    return std::make_pair(lo, hi);
}

std::string panel_csv(const FeaturePanel& panel) {
    std::vector<std::string> header = {"player_id", "date"};
    header.insert(header.end(), panel.feature_names().begin(), panel.feature_names().end());
    csv::Writer w(header);
    std::vector<std::string> row;
    for (const auto& t : panel.tracks()) {
        for (std::size_t d = 0; d < t.n_days(); ++d) {
            row.clear();
            row.push_back(t.player_id());
            row.push_back((t.first_date() + static_cast<int>(d)).iso());
            for (std::size_t f = 0; f < panel.n_features(); ++f)
                row.push_back(csv::format_number(t.value(d, f)));
            w.row(row);
        }
    }
    return w.str();
}

}  // namespace injurycast
