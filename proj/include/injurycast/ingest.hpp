#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "injurycast/date.hpp"

namespace injurycast {

/// Raw monitoring columns, in export order.
enum class Field : std::size_t {
    fatigue,
    mood,
    readiness,
    sleep_duration,
    soreness,
    stress,
    rpe,
    srpe,
    duration_subj,
    duration_obj,
    speed_km_h_mean,
    speed_km_h_max,
    speed_km_h_std,
    sp_lir_p,
    sp_lir_t,
    sp_lir_d,
    sp_mir_p,
    sp_mir_t,
    sp_mir_d,
    sp_hir_p,
    sp_hir_t,
    sp_hir_d,
    sp_spr_p,
    sp_spr_t,
    sp_spr_d,
    distance,
    distance_per_min,
};

inline constexpr std::size_t kFieldCount = static_cast<std::size_t>(Field::distance_per_min) + 1;

std::string_view field_name(Field f);
std::optional<Field> field_from_name(std::string_view name);
constexpr std::size_t field_index(Field f) { return static_cast<std::size_t>(f); }

/// The six daily wellness questionnaire items.
inline constexpr std::array<Field, 6> kWellnessFields = {Field::fatigue,  Field::mood,
                                                         Field::readiness, Field::sleep_duration,
                                                         Field::soreness, Field::stress};

/// Fields produced by the GNSS tracker.
bool is_objective(Field f);

/// One player's monitoring record for one session/day. Every field may be missing.
struct PlayerDay {
    std::string player_id;
    Date date;
    std::array<std::optional<double>, kFieldCount> fields{};

    std::optional<double>& operator[](Field f) { return fields[field_index(f)]; }
    const std::optional<double>& operator[](Field f) const { return fields[field_index(f)]; }
};

/// Returns human-readable invariant violations (empty when valid).
std::vector<std::string> validate(const PlayerDay& day);

enum class InjuryType { acute, overuse };

std::string_view to_string(InjuryType t);
std::optional<InjuryType> injury_type_from_string(std::string_view s);

struct InjuryEvent {
    std::string player_id;
    Date date;
    InjuryType type = InjuryType::acute;
    std::string body_part;
};

struct MonitoringTable {
    std::vector<PlayerDay> rows;
    /// Header columns that are not part of the schema; they are skipped.
    std::vector<std::string> ignored_columns;
};

/// Throws SchemaError (missing player_id/date) or RowError (bad date, number, invariant).
MonitoringTable parse_monitoring_csv(const std::filesystem::path& path);
MonitoringTable parse_monitoring_text(std::string_view text);

/// Sorted by (player_id, date); stable for same-day duplicates.
std::vector<InjuryEvent> parse_injury_reports(const std::filesystem::path& path);
std::vector<InjuryEvent> parse_injury_text(std::string_view text);

enum class CleaningRule { max_speed, session_duration, distance };

std::string_view to_string(CleaningRule r);

struct Rejection {
    std::size_t row = 0;
    CleaningRule rule = CleaningRule::max_speed;
    double value = 0.0;
};

struct CleaningReport {
    std::size_t input_rows = 0;
    std::size_t retained = 0;
    std::array<std::size_t, 3> counts{};
    std::vector<Rejection> rejections;

    std::size_t count(CleaningRule r) const { return counts[static_cast<std::size_t>(r)]; }
    std::size_t rejected() const { return rejections.size(); }
};

inline constexpr double kMaxSpeedKmH = 32.0;
inline constexpr double kMaxSessionMinutes = 200.0;
inline constexpr double kMaxDistanceKm = 16.0;

struct CleanResult {
    std::vector<PlayerDay> records;
    CleaningReport report;
};

/// Drops physiologically implausible rows. Thresholds are strict: values equal to
/// a limit are kept. A row is attributed to the first rule it breaks.
CleanResult clean(std::span<const PlayerDay> records);

/// `rejections.csv`: row_index,rule,value
std::string rejections_csv(const CleaningReport& report);

/// Inverse of parse_monitoring_csv; writes every schema column.
std::string monitoring_csv(std::span<const PlayerDay> records);
std::string injuries_csv(std::span<const InjuryEvent> injuries);

}  // namespace injurycast
