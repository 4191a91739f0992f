#include "injurycast/cohort.hpp"

#include <random>

#include "injurycast/csv.hpp"
#include "injurycast/features.hpp"

namespace injurycast {

namespace {

std::map<std::string, std::vector<Date>> injury_dates_by_player(
    std::span<const InjuryEvent> injuries) {
    std::map<std::string, std::vector<Date>> out;
    for (const auto& ev : injuries) out[ev.player_id].push_back(ev.date);
    for (auto& [_, dates] : out) std::sort(dates.begin(), dates.end());
    return out;
}

std::vector<double> row_of(const PlayerTrack& t, std::size_t day) {
    std::vector<double> x(t.n_features());
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = t.value(day, f);
    return x;
}

}  // namespace

std::vector<SurvivalSample> build_survival_samples(const FeaturePanel& panel,
                                                   std::span<const InjuryEvent> injuries,
                                                   const SurvivalOptions& opt) {
    if (opt.lookback < 1 || opt.horizon < 1)
        throw ConfigError("lookback and horizon must be >= 1");
    if (opt.post_injury_exclusion < 0) throw ConfigError("post-injury exclusion must be >= 0");

    const FeaturePanel agg = rolling_means(panel, opt.lookback);
    const auto injury_dates = injury_dates_by_player(injuries);
    static const std::vector<Date> kNone;

    std::vector<SurvivalSample> out;
    for (const auto& t : agg.tracks()) {
        const auto it = injury_dates.find(t.player_id());
        const auto& dates = it == injury_dates.end() ? kNone : it->second;
        for (std::size_t d = static_cast<std::size_t>(opt.lookback - 1); d < t.n_days(); ++d) {
            const Date anchor = t.first_date() + static_cast<int>(d);
            const bool recovering = std::any_of(dates.begin(), dates.end(), [&](Date inj) {
                const int since = anchor - inj;
                return since >= 0 && since <= opt.post_injury_exclusion;
            });
            if (recovering) continue;

            const auto next = std::upper_bound(dates.begin(), dates.end(), anchor);
            const int days_left = t.last_date() - anchor;
            SurvivalSample s;
            if (next != dates.end() && *next - anchor <= opt.horizon) {
                s.time_to_event = *next - anchor;
                s.event = 1;
            } else {
                s.time_to_event = std::min(opt.horizon, days_left);
                s.event = 0;
                if (s.time_to_event < 1) continue;
            }
            s.player_id = t.player_id();
            s.anchor_date = anchor;
            s.x = row_of(t, d);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<BinarySample> build_binary_samples(const FeaturePanel& panel,
                                               std::span<const InjuryEvent> injuries,
                                               int lookback, int horizon) {
    if (lookback < 1 || horizon < 1) throw ConfigError("lookback and horizon must be >= 1");
    const FeaturePanel agg = rolling_means(panel, lookback);
    const auto injury_dates = injury_dates_by_player(injuries);
    static const std::vector<Date> kNone;

    std::vector<BinarySample> out;
    for (const auto& t : agg.tracks()) {
        const auto it = injury_dates.find(t.player_id());
        const auto& dates = it == injury_dates.end() ? kNone : it->second;
        for (std::size_t d = static_cast<std::size_t>(lookback - 1); d < t.n_days(); ++d) {
            const Date anchor = t.first_date() + static_cast<int>(d);
            const auto next = std::upper_bound(dates.begin(), dates.end(), anchor);
            const int label = next != dates.end() && *next - anchor <= horizon ? 1 : 0;
            if (label == 0 && t.last_date() - anchor < horizon) continue;
            out.push_back({t.player_id(), anchor, row_of(t, d), label});
        }
    }
    return out;
}

ScalerStats fit_scaler(std::span<const std::vector<double>> rows) {
    ScalerStats st;
    if (rows.empty()) return st;
    const std::size_t nf = rows.front().size();
    st.mean.assign(nf, 0.0);
    st.sd.assign(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        double acc = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows)
            if (std::isfinite(r[f])) {
                acc += r[f];
                ++n;
            }
        if (n == 0) continue;
        const double mean = acc / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : rows)
            if (std::isfinite(r[f])) ss += (r[f] - mean) * (r[f] - mean);
        st.mean[f] = mean;
        st.sd[f] = std::sqrt(ss / static_cast<double>(n));
    }
    return st;
}

std::vector<double> apply_scaler(const ScalerStats& stats, std::span<const double> row) {
    if (row.size() != stats.mean.size())
        throw std::invalid_argument("scaler dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t f = 0; f < row.size(); ++f) {
        if (!std::isfinite(row[f]) || stats.sd[f] <= 0.0)
            out[f] = 0.0;
        else
            out[f] = (row[f] - stats.mean[f]) / stats.sd[f];
    }
    return out;
}

OversampleResult oversample_minority(const std::vector<BinarySample>& train, std::uint64_t seed) {
    OversampleResult res;
    res.samples = train;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < train.size(); ++i) (train[i].label ? pos : neg).push_back(i);
    const auto& minority = pos.size() <= neg.size() ? pos : neg;
    const std::size_t target = std::max(pos.size(), neg.size());
    if (minority.empty()) {
        res.degenerate = true;
        return res;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
    for (std::size_t n = minority.size(); n < target; ++n)
        res.samples.push_back(train[minority[pick(rng)]]);
    return res;
}

std::string survival_samples_csv(const std::vector<SurvivalSample>& samples,
                                 const std::vector<std::string>& feature_names) {
    std::vector<std::string> header = {"player_id", "anchor_date", "time_to_event", "event"};
    header.insert(header.end(), feature_names.begin(), feature_names.end());
    csv::Writer w(header);
    std::vector<std::string> row;
    for (const auto& s : samples) {
        row = {s.player_id, s.anchor_date.iso(), std::to_string(s.time_to_event),
               std::to_string(s.event)};
        for (double v : s.x) row.push_back(csv::format_number(v));
        w.row(row);
    }
    return w.str();
}

std::string binary_samples_csv(const std::vector<BinarySample>& samples,
                               const std::vector<std::string>& feature_names) {
    std::vector<std::string> header = {"player_id", "anchor_date", "label"};
    header.insert(header.end(), feature_names.begin(), feature_names.end());
    csv::Writer w(header);
    std::vector<std::string> row;
    for (const auto& s : samples) {
        row = {s.player_id, s.anchor_date.iso(), std::to_string(s.label)};
        for (double v : s.x) row.push_back(csv::format_number(v));
        w.row(row);
    }
    return w.str();
}

}  // namespace injurycast
