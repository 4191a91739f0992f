#include "injurycast/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace injurycast {

namespace {

constexpr int kWeek = 7;
constexpr int kAcwrChronic = 28;

enum class Aggregate { sum, max, mean };

Aggregate aggregate_rule(Field f) {
    switch (f) {
        case Field::srpe:
        case Field::duration_subj:
        case Field::duration_obj:
        case Field::sp_lir_t:
        case Field::sp_lir_d:
        case Field::sp_mir_t:
        case Field::sp_mir_d:
        case Field::sp_hir_t:
        case Field::sp_hir_d:
        case Field::sp_spr_t:
        case Field::sp_spr_d:
        case Field::distance:
            return Aggregate::sum;
        case Field::speed_km_h_max:
            return Aggregate::max;
        default:
            return Aggregate::mean;
    }
}

/// Trailing window [d - len + 1, d] with rest = 0; nullopt before the first load.
std::optional<std::vector<double>> window_loads(const LoadSeries& s, Date d, int len) {
    const auto first = s.first_observed();
    if (!first || d < *first) return std::nullopt;
    std::vector<double> w(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) w[static_cast<std::size_t>(k)] = s.load_or_rest(d - k);
    return w;
}

double sum(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

}  // namespace

LoadSeries::LoadSeries(Date first_date, std::vector<std::optional<double>> daily)
    : first_date_(first_date), daily_(std::move(daily)) {
    for (std::size_t i = 0; i < daily_.size(); ++i) {
        if (daily_[i]) {
            first_observed_ = first_date_ + static_cast<int>(i);
            break;
        }
    }
}

double LoadSeries::load_or_rest(Date d) const {
    const int offset = d - first_date_;
    if (offset < 0 || static_cast<std::size_t>(offset) >= daily_.size()) return 0.0;
    const auto& v = daily_[static_cast<std::size_t>(offset)];
    return v ? *v : 0.0;
}

std::optional<double> daily_load(std::span<const PlayerDay> sessions_on_day) {
    std::optional<double> total;
    for (const auto& s : sessions_on_day)
        if (const auto& v = s[Field::srpe]) total = total.value_or(0.0) + *v;
    return total;
}

std::optional<double> atl(const LoadSeries& s, Date d) {
    const auto w = window_loads(s, d, kWeek);
    if (!w) return std::nullopt;
    return sum(*w) / kWeek;
}

std::optional<double> weekly_load(const LoadSeries& s, Date d) {
    const auto w = window_loads(s, d, kWeek);
    if (!w) return std::nullopt;
    return sum(*w);
}

std::optional<double> monotony(const LoadSeries& s, Date d) {
    const auto first = s.first_observed();
    if (!first || d - (kWeek - 1) < *first) return std::nullopt;
    const auto w = window_loads(s, d, kWeek);
    const double mean = sum(*w) / kWeek;
    double ss = 0.0;
    for (double x : *w) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (kWeek - 1));
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) return std::nullopt;
    return mean / sd;
}

std::optional<double> strain(const LoadSeries& s, Date d) {
    const auto m = monotony(s, d);
    if (!m) return std::nullopt;
    return *weekly_load(s, d) * *m;
}

std::optional<double> ctl(const LoadSeries& s, Date d, int window) {
    if (window != 28 && window != 42) throw std::invalid_argument("ctl window must be 28 or 42");
    const auto w = window_loads(s, d, window);
    if (!w) return std::nullopt;
    return sum(*w);
}

std::optional<double> acwr(const LoadSeries& s, Date d) {
    const auto chronic = window_loads(s, d, kAcwrChronic);
    if (!chronic) return std::nullopt;
    const double chronic_mean = sum(*chronic) / kAcwrChronic;
    if (chronic_mean == 0.0) return std::nullopt;
    double acute = 0.0;
    for (int k = 0; k < kWeek; ++k) acute += (*chronic)[static_cast<std::size_t>(k)];
    return (acute / kWeek) / chronic_mean;
}

int past_injury_count(std::span<const InjuryEvent> injuries, std::string_view player, Date d) {
    int n = 0;
    for (const auto& ev : injuries)
        if (ev.player_id == player && ev.date < d) ++n;
    return n;
}

std::optional<double> subjective_missingness_7d(const FeaturePanel& panel, std::size_t player,
                                                Date d) {
    std::vector<std::size_t> cols;
    for (Field f : kWellnessFields) {
        const auto idx = panel.feature_index(field_name(f));
        if (!idx) throw std::invalid_argument("panel lacks wellness column " +
                                              std::string(field_name(f)));
        cols.push_back(*idx);
    }
    const auto& t = panel.track(player);
    int days = 0;
    int missing = 0;
    for (int k = 0; k < kWeek; ++k) {
        const auto day = t.day_of(d - k);
        if (!day) continue;
        ++days;
        const bool answered =
            std::any_of(cols.begin(), cols.end(), [&](std::size_t c) { return t.observed(*day, c); });
        if (!answered) ++missing;
    }
    if (days == 0) return std::nullopt;
    return static_cast<double>(missing) / days;
}

FeaturePanel rolling_means(const FeaturePanel& panel, int window) {
    if (window < 1) throw std::invalid_argument("rolling window must be >= 1");
    FeaturePanel out(panel.feature_names());
    const std::size_t nf = panel.n_features();
    const auto w = static_cast<std::size_t>(window);
    for (const auto& t : panel.tracks()) {
        auto& dst = out.add_player(t.player_id(), t.first_date(), t.n_days());
        for (std::size_t d = 0; d < t.n_days(); ++d) {
            const std::size_t lo = d + 1 >= w ? d + 1 - w : 0;
            for (std::size_t f = 0; f < nf; ++f) {
                double acc = 0.0;
                int count = 0;
                for (std::size_t k = lo; k <= d; ++k) {
                    if (!t.observed(k, f)) continue;
                    acc += t.value(k, f);
                    ++count;
                }
                if (count > 0) dst.set(d, f, acc / count);
            }
        }
    }
    return out;
}

const std::vector<std::string>& derived_feature_names() {
    static const std::vector<std::string> names = {
        "daily_load", "atl",   "weekly_load", "monotony",          "strain",
        "acwr",       "ctl28", "ctl42",       "past_injury_count", "subjective_missingness_7d"};
    return names;
}

FeaturePanel build_feature_panel(std::span<const PlayerDay> records,
                                 std::span<const InjuryEvent> injuries) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < kFieldCount; ++i)
        names.emplace_back(field_name(static_cast<Field>(i)));
    const std::size_t first_derived = names.size();
    for (const auto& n : derived_feature_names()) names.push_back(n);
    FeaturePanel panel(std::move(names));

    std::map<std::string, std::map<Date, std::vector<const PlayerDay*>>> by_player;
    for (const auto& r : records) by_player[r.player_id][r.date].push_back(&r);

    for (const auto& [player, days] : by_player) {
        const Date first = days.begin()->first;
        const Date last = days.rbegin()->first;
        const auto n_days = static_cast<std::size_t>(last - first + 1);
        auto& track = panel.add_player(player, first, n_days);
        std::vector<std::optional<double>> loads(n_days);

        for (const auto& [date, sessions] : days) {
            const auto day = static_cast<std::size_t>(date - first);
            for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
                const auto field = static_cast<Field>(fi);
                const Aggregate rule = aggregate_rule(field);
                double acc = rule == Aggregate::max ? -INFINITY : 0.0;
                int count = 0;
                for (const PlayerDay* s : sessions) {
                    const auto& v = (*s)[field];
                    if (!v) continue;
                    ++count;
                    if (rule == Aggregate::max)
                        acc = std::max(acc, *v);
                    else
                        acc += *v;
                }
                if (count == 0) continue;
                if (rule == Aggregate::mean) acc /= count;
                track.set(day, fi, acc);
            }
            const auto dist = track.get(day, field_index(Field::distance));
            const auto dur = track.get(day, field_index(Field::duration_obj));
            if (sessions.size() > 1 && dist && dur && *dur > 0.0)
                track.set(day, field_index(Field::distance_per_min), *dist / *dur);

            std::vector<PlayerDay> copies;
            copies.reserve(sessions.size());
            for (const PlayerDay* s : sessions) copies.push_back(*s);
            loads[day] = daily_load(copies);
        }

        const LoadSeries series(first, loads);
        for (std::size_t d = 0; d < n_days; ++d) {
            const Date date = first + static_cast<int>(d);
            std::size_t c = first_derived;
            auto put = [&](std::optional<double> v) {
                if (v) track.set(d, c, *v);
                ++c;
            };
            put(loads[d]);
            put(atl(series, date));
            put(weekly_load(series, date));
            put(monotony(series, date));
            put(strain(series, date));
            put(acwr(series, date));
            put(ctl(series, date, 28));
            put(ctl(series, date, 42));
            put(static_cast<double>(past_injury_count(injuries, player, date)));
        }
    }

    const std::size_t missingness_col = first_derived + derived_feature_names().size() - 1;
    for (std::size_t p = 0; p < panel.n_players(); ++p) {
        auto& track = panel.track(p);
        for (std::size_t d = 0; d < track.n_days(); ++d) {
            const auto v =
                subjective_missingness_7d(panel, p, track.first_date() + static_cast<int>(d));
            if (v) track.set(d, missingness_col, *v);
        }
    }
    return panel;
}

}  // namespace injurycast
