#include "injurycast/impute.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "injurycast/csv.hpp"
#include "injurycast/metrics.hpp"

namespace injurycast {

namespace {

constexpr std::size_t kMinTeammates = 2;

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct TeamMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

/// Population moments over observed players on `d`, skipping `exclude`.
TeamMoments teammates_on(const FeaturePanel& panel, std::size_t exclude, Date d,
                         std::size_t feature) {
    std::vector<double> vals;
    vals.reserve(panel.n_players());
    for (std::size_t q = 0; q < panel.n_players(); ++q) {
        if (q == exclude) continue;
        if (const auto v = panel.at(q, d, feature)) vals.push_back(*v);
    }
    TeamMoments m;
    m.n = vals.size();
    if (m.n == 0) return m;
    for (double v : vals) m.mean += v;
    m.mean /= static_cast<double>(m.n);
    double ss = 0.0;
    for (double v : vals) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(m.n));
    return m;
}

}  // namespace

std::string_view to_string(ImputeMethod m) {
    switch (m) {
        case ImputeMethod::none: return "none";
        case ImputeMethod::median: return "median";
        case ImputeMethod::bespoke: return "bespoke";
        case ImputeMethod::linear: return "linear";
    }
    return "?";
}

std::optional<ImputeMethod> impute_method_from_string(std::string_view s) {
    for (auto m : {ImputeMethod::none, ImputeMethod::median, ImputeMethod::bespoke,
                   ImputeMethod::linear})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

FeaturePanel impute_median(const FeaturePanel& panel) {
    FeaturePanel out = panel;
    for (std::size_t p = 0; p < out.n_players(); ++p) {
        auto& t = out.track(p);
        for (std::size_t f = 0; f < out.n_features(); ++f) {
            std::vector<double> seen;
            for (std::size_t d = 0; d < t.n_days(); ++d)
                if (t.observed(d, f)) seen.push_back(t.value(d, f));
            if (seen.empty() || seen.size() == t.n_days()) continue;
            const double med = median_of(std::move(seen));
            for (std::size_t d = 0; d < t.n_days(); ++d)
                if (!t.observed(d, f)) t.set(d, f, med);
        }
    }
    return out;
}

FeaturePanel impute_relative_standing(const FeaturePanel& panel, int window) {
    if (window < 1) throw std::invalid_argument("standing window must be >= 1");
    FeaturePanel out = panel;
    for (std::size_t p = 0; p < panel.n_players(); ++p) {
        const auto& src = panel.track(p);
        auto& dst = out.track(p);
        for (std::size_t f = 0; f < panel.n_features(); ++f) {
            for (std::size_t d = 0; d < src.n_days(); ++d) {
                if (src.observed(d, f)) continue;
                const Date date = src.first_date() + static_cast<int>(d);
                const TeamMoments today = teammates_on(panel, p, date, f);
                if (today.n < kMinTeammates) continue;

                double z_sum = 0.0;
                int z_days = 0;
                for (int k = 1; k <= window; ++k) {
                    const Date past = date - k;
                    const auto own = panel.at(p, past, f);
                    if (!own) continue;
                    const TeamMoments then = teammates_on(panel, p, past, f);
                    if (then.n < kMinTeammates || then.sd <= 0.0) continue;
                    z_sum += (*own - then.mean) / then.sd;
                    ++z_days;
                }
                if (z_days == 0) continue;
                const double standing = z_sum / z_days;
                dst.set(d, f, today.mean + standing * today.sd);
            }
        }
    }
    return out;
}

FeaturePanel impute_linear(const FeaturePanel& panel) {
    FeaturePanel out = panel;
    for (std::size_t p = 0; p < out.n_players(); ++p) {
        auto& t = out.track(p);
        for (std::size_t f = 0; f < out.n_features(); ++f) {
            std::optional<std::size_t> prev;
            for (std::size_t d = 0; d < t.n_days(); ++d) {
                if (!t.observed(d, f)) continue;
                if (prev && d > *prev + 1) {
                    const double y0 = t.value(*prev, f);
                    const double y1 = t.value(d, f);
                    const double span = static_cast<double>(d - *prev);
                    for (std::size_t g = *prev + 1; g < d; ++g) {
                        const double frac = static_cast<double>(g - *prev) / span;
                        t.set(g, f, y0 + frac * (y1 - y0));
                    }
                }
                prev = d;
            }
        }
    }
    return out;
}

FeaturePanel impute(const FeaturePanel& panel, ImputeMethod method) {
    switch (method) {
        case ImputeMethod::none: return panel;
        case ImputeMethod::median: return impute_median(panel);
        case ImputeMethod::bespoke: return impute_relative_standing(panel);
        case ImputeMethod::linear: return impute_linear(panel);
    }
    return panel;
}

std::optional<double> ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return std::nullopt;
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j == y.size() || (i < x.size() && x[i] <= y[j]))
            v = x[i];
        else
            v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return best;
}

ImputationDiagnostics diagnostics(const FeaturePanel& before, const FeaturePanel& after,
                                  std::span<const InjuryEvent> injuries) {
    if (before.feature_names() != after.feature_names() || before.n_players() != after.n_players())
        throw std::invalid_argument("diagnostics: panels do not share a layout");

    std::set<std::pair<std::string, Date>> injury_days;
    for (const auto& ev : injuries) injury_days.emplace(ev.player_id, ev.date);

    ImputationDiagnostics out;
    for (std::size_t f = 0; f < before.n_features(); ++f) {
        FeatureDiagnostics fd;
        fd.feature = before.feature_names()[f];
        fd.fraction_missing_before = before.missing_fraction(f);
        fd.fraction_missing_after = after.missing_fraction(f);

        std::vector<double> obs_before, obs_after, lab_before, lab_after;
        for (std::size_t p = 0; p < before.n_players(); ++p) {
            const auto& tb = before.track(p);
            const auto& ta = after.track(p);
            for (std::size_t d = 0; d < tb.n_days(); ++d) {
                const Date next = tb.first_date() + static_cast<int>(d) + 1;
                const double label = injury_days.count({tb.player_id(), next}) ? 1.0 : 0.0;
                if (tb.observed(d, f)) {
                    obs_before.push_back(tb.value(d, f));
                    lab_before.push_back(label);
                }
                if (ta.observed(d, f)) {
                    obs_after.push_back(ta.value(d, f));
                    lab_after.push_back(label);
                }
            }
        }
        fd.ks_distance = ks_distance(obs_before, obs_after);
        fd.injury_corr_before = pearson_r(obs_before, lab_before);
        fd.injury_corr_after = pearson_r(obs_after, lab_after);
        out.features.push_back(std::move(fd));
    }
    return out;
}

std::string diagnostics_csv(const ImputationDiagnostics& diag) {
    csv::Writer w({"feature", "fraction_missing_before", "fraction_missing_after", "ks_distance",
                   "injury_corr_before", "injury_corr_after"});
    auto opt = [](const std::optional<double>& v) {
        return v ? csv::format_number(*v) : std::string();
    };
    for (const auto& fd : diag.features)
        w.row({fd.feature, csv::format_number(fd.fraction_missing_before),
               csv::format_number(fd.fraction_missing_after), opt(fd.ks_distance),
               opt(fd.injury_corr_before), opt(fd.injury_corr_after)});
    return w.str();
}

DropResult drop_high_missingness(const FeaturePanel& panel, double threshold) {
    std::vector<std::size_t> keep;
    DropResult out;
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        if (panel.missing_fraction(f) > threshold)
            out.dropped.push_back(panel.feature_names()[f]);
        else
            keep.push_back(f);
    }
    out.panel = panel.select(keep);
    return out;
}

}  // namespace injurycast
