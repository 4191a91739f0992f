#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace injurycast {

/// Harrell's concordance index. A pair (i, j) is comparable when t_i < t_j and
/// event_i = 1; it is concordant when score_i > score_j, and score ties count 1/2.
/// nullopt when no pair is comparable. O(n log n).
std::optional<double> c_index(std::span<const double> scores, std::span<const int> times,
                              std::span<const int> events);

struct BinaryMetrics {
    std::optional<double> f1;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> auc;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Positive prediction when proba >= threshold. AUC is the Mann-Whitney statistic
/// with mid-rank tie correction.
BinaryMetrics binary_metrics(std::span<const double> probas, std::span<const int> labels,
                             double threshold = 0.5);

/// Metrics straight from confusion counts (AUC left unset).
BinaryMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

/// nullopt when either side has zero variance or fewer than two points.
std::optional<double> pearson_r(std::span<const double> x, std::span<const double> y);

/// Linear-interpolated quantile (q in [0,1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);

struct PlayerEvaluation {
    std::string player_id;
    std::optional<double> c_index;
    std::size_t n_samples = 0;
    std::size_t n_sessions_tracked = 0;
    std::size_t n_injuries = 0;
};

struct LopoReport {
    std::vector<PlayerEvaluation> players;
    std::optional<double> median;
    std::optional<double> iqr;
    std::optional<double> r_sessions;
    std::optional<double> r_injuries;
};

/// Per-player summary counts that the report correlates against.
struct PlayerStats {
    std::size_t n_sessions_tracked = 0;
    std::size_t n_injuries = 0;
};

/// Held-out scoring of one fold: returns (scores, times, events) for the test player.
struct FoldScores {
    std::vector<double> scores;
    std::vector<int> times;
    std::vector<int> events;
};

/// Aggregates per-player held-out C-indices. `evaluate_fold(i)` trains on fold i's
/// training side and scores its held-out player `fold_players[i]`.
LopoReport lopo_evaluate(const std::vector<std::string>& fold_players,
                         const std::function<FoldScores(std::size_t)>& evaluate_fold,
                         const std::map<std::string, PlayerStats>& stats);

std::string lopo_report_csv(const LopoReport& report);

}  // namespace injurycast
