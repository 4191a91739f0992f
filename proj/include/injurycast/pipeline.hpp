#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/baselines.hpp"
#include "injurycast/cohort.hpp"
#include "injurycast/deephit.hpp"
#include "injurycast/explain.hpp"
#include "injurycast/impute.hpp"
#include "injurycast/ingest.hpp"
#include "injurycast/metrics.hpp"
#include "injurycast/panel.hpp"
#include "injurycast/synth.hpp"

namespace injurycast {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kRunsRootEnv = "INJURYCAST_RUNS_ROOT";

struct ConfigKey {
    std::string section;
    std::string key;
    std::string default_value;
    std::string help;
};

/// Every recognised key, in canonical order. Key names are unique across sections;
/// the matching command-line flag is `--` followed by the key with '_' -> '-'.
const std::vector<ConfigKey>& config_keys();

std::string flag_name(std::string_view key);

/// Parses `[section]` / `key = value` text. '#' and ';' start comment lines.
/// Returns "section.key" -> value. Throws ConfigError listing every malformed line
/// and unknown key.
std::map<std::string, std::string> parse_config_text(std::string_view text);

struct RunConfig {
    std::filesystem::path monitoring;
    std::filesystem::path injuries;
    std::filesystem::path output_root;
    std::string run_id;

    ImputeMethod impute = ImputeMethod::bespoke;
    SurvivalOptions survival;
    std::string split = "chronological";
    double train_fraction = 0.8;
    double drop_threshold = 0.5;
    std::vector<int> window_sweep;

    std::string family = "deephit";
    MlpConfig mlp;
    DeepHitConfig deephit;

    HyperParams baseline_params;
    bool grid_search = false;
    ScorerWeights scorer;
    std::uint64_t baseline_seed = 1;

    int players = 30;
    int days = 300;
    Date start_date = Date::from_ymd(2020, 1, 1);
    HazardSpec hazard;

    std::size_t background = 100;
    ShapOptions shap;
    std::string explain_player;
    std::string season_player;

    /// Resolved "section.key" -> value for every key (the provenance echo).
    std::map<std::string, std::string> values;
};

/// Defaults, then file values, then overrides. Validates every key and throws one
/// ConfigError listing all problems.
RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides = {});

/// Throws ConfigError naming every input path that is unset or missing.
void check_inputs(const RunConfig& cfg);

/// `[section]` / `key = value` rendering of every resolved key.
std::string canonical_config_text(const RunConfig& cfg);

/// Hash of the canonical config (excluding run_id and output_root).
std::string config_hash(const RunConfig& cfg);

/// Explicit run_id when set, otherwise the config hash.
std::string effective_run_id(const RunConfig& cfg);

/// output_root, or $INJURYCAST_RUNS_ROOT, or ./runs.
std::filesystem::path run_directory(const RunConfig& cfg);

bool is_deephit(const RunConfig& cfg);
Family baseline_family(const RunConfig& cfg);

struct PreparedData {
    std::size_t input_rows = 0;
    CleaningReport cleaning;
    std::vector<std::string> ignored_columns;
    std::vector<PlayerDay> records;  // after cleaning
    std::vector<InjuryEvent> injuries;
    FeaturePanel features;           // derived, before imputation
    ImputationDiagnostics diagnostics;
    /// Features still missing in more than drop_threshold of cells after imputation.
    std::vector<std::string> dropped;
    FeaturePanel panel;              // imputed, retained features only
};

PreparedData prepare(const RunConfig& cfg, std::vector<PlayerDay> raw,
                     std::vector<InjuryEvent> injuries,
                     std::vector<std::string> ignored_columns = {});
PreparedData load_and_prepare(const RunConfig& cfg);

struct DeepHitHoldout {
    DeepHitModel model;
    TrainHistory history;
    /// Standardized with the training-side scaler.
    std::vector<SurvivalSample> train;
    std::vector<SurvivalSample> test;
    std::vector<double> test_scores;
    std::optional<double> c_index;
};

/// Fits the scaler on `train_raw` only, trains, and bundles the model.
DeepHitModel fit_deephit(const RunConfig& cfg, const FeaturePanel& panel,
                         std::vector<SurvivalSample> train_raw, TrainHistory* history = nullptr);

/// Chronological split of the survival samples, training, and holdout C-index.
DeepHitHoldout deephit_holdout(const RunConfig& cfg, const PreparedData& data);

struct BaselineHoldout {
    HyperParams params;
    std::optional<GridResult> grid;
    EvaluationSplit split;
    BinaryMetrics metrics;
    std::vector<double> importances;
    std::optional<double> c_index;
};

BaselineHoldout baseline_holdout(const RunConfig& cfg, const PreparedData& data);

std::map<std::string, PlayerStats> player_stats(const PreparedData& data);

/// Leave-one-player-out evaluation with the configured family.
LopoReport lopo(const RunConfig& cfg, const PreparedData& data);

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"simulate", "ingest", "features", "impute", "build",
                                                "train",    "evaluate", "lopo", "explain", "report"};
    return names;
}

/// Runs one subcommand, writing its artifacts under run_directory(cfg). Returns the
/// run directory. Throws ConfigError, DataError, or TrainingError.
std::filesystem::path run_command(std::string_view command, const RunConfig& cfg);

}  // namespace injurycast
