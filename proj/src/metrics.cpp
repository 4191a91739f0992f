#include "injurycast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "injurycast/csv.hpp"

namespace injurycast {

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    /// Count of inserted positions < i.
    std::int64_t prefix(std::size_t i) const {
        std::int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

}  // namespace

std::optional<double> c_index(std::span<const double> scores, std::span<const int> times,
                              std::span<const int> events) {
    const std::size_t n = scores.size();
    if (times.size() != n || events.size() != n)
        throw std::invalid_argument("c_index: length mismatch");

    std::vector<double> uniq(scores.begin(), scores.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto rank_of = [&](double s) {
        return static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), s) - uniq.begin());
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return times[a] > times[b];
    });

    Fenwick later(uniq.size());
    std::int64_t inserted = 0;
    std::int64_t concordant2 = 0;  // twice the concordance credit
    std::int64_t comparable = 0;
    for (std::size_t g = 0; g < n;) {
        std::size_t end = g;
        while (end < n && times[order[end]] == times[order[g]]) ++end;
        for (std::size_t k = g; k < end; ++k) {
            const std::size_t i = order[k];
            if (!events[i]) continue;
            const std::size_t r = rank_of(scores[i]);
            const std::int64_t below = later.prefix(r);
            const std::int64_t tied = later.prefix(r + 1) - below;
            concordant2 += 2 * below + tied;
            comparable += inserted;
        }
        for (std::size_t k = g; k < end; ++k) later.add(rank_of(scores[order[k]]));
        inserted += static_cast<std::int64_t>(end - g);
        g = end;
    }
    if (comparable == 0) return std::nullopt;
    return static_cast<double>(concordant2) / static_cast<double>(2 * comparable);
}

BinaryMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    BinaryMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (2 * tp + fp + fn > 0)
        m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    return m;
}

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("auc: length mismatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t g = 0; g < n;) {
        std::size_t end = g;
        while (end < n && scores[order[end]] == scores[order[g]]) ++end;
        const double mid_rank = 0.5 * static_cast<double>(g + 1 + end);
        for (std::size_t k = g; k < end; ++k) {
            if (labels[order[k]]) {
                rank_sum_pos += mid_rank;
                ++n_pos;
            }
        }
        g = end;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

BinaryMetrics binary_metrics(std::span<const double> probas, std::span<const int> labels,
                             double threshold) {
    if (probas.size() != labels.size()) throw std::invalid_argument("binary_metrics: length mismatch");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < probas.size(); ++i) {
        const bool pred = probas[i] >= threshold;
        if (labels[i]) (pred ? tp : fn)++;
        else (pred ? fp : tn)++;
    }
    BinaryMetrics m = metrics_from_counts(tp, fp, tn, fn);
    m.auc = auc(probas, labels);
    return m;
}

std::optional<double> pearson_r(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("pearson_r: length mismatch");
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

LopoReport lopo_evaluate(const std::vector<std::string>& fold_players,
                         const std::function<FoldScores(std::size_t)>& evaluate_fold,
                         const std::map<std::string, PlayerStats>& stats) {
    LopoReport report;
    std::vector<double> cs, sessions, injuries;
    for (std::size_t i = 0; i < fold_players.size(); ++i) {
        const FoldScores fs = evaluate_fold(i);
        PlayerEvaluation pe;
        pe.player_id = fold_players[i];
        pe.n_samples = fs.scores.size();
        if (auto it = stats.find(pe.player_id); it != stats.end()) {
            pe.n_sessions_tracked = it->second.n_sessions_tracked;
            pe.n_injuries = it->second.n_injuries;
        }
        pe.c_index = c_index(fs.scores, fs.times, fs.events);
        if (pe.c_index) {
            cs.push_back(*pe.c_index);
            sessions.push_back(static_cast<double>(pe.n_sessions_tracked));
            injuries.push_back(static_cast<double>(pe.n_injuries));
        }
        report.players.push_back(std::move(pe));
    }
    if (!cs.empty()) {
        report.median = quantile(cs, 0.5);
        report.iqr = quantile(cs, 0.75) - quantile(cs, 0.25);
    }
    report.r_sessions = pearson_r(cs, sessions);
    report.r_injuries = pearson_r(cs, injuries);
    return report;
}

std::string lopo_report_csv(const LopoReport& report) {
    csv::Writer w({"player_id", "c_index", "computable", "n_samples", "n_sessions_tracked",
                   "n_injuries"});
    for (const auto& p : report.players)
        w.row({p.player_id, p.c_index ? csv::format_number(*p.c_index) : std::string(),
               p.c_index ? "1" : "0", std::to_string(p.n_samples),
               std::to_string(p.n_sessions_tracked), std::to_string(p.n_injuries)});
    return w.str();
}

}  // namespace injurycast
