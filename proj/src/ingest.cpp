#include "injurycast/ingest.hpp"

#include <algorithm>
#include <cmath>

#include "injurycast/csv.hpp"
#include "injurycast/errors.hpp"

namespace injurycast {

namespace {

constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "fatigue",         "mood",            "readiness",       "sleep_duration", "soreness",
    "stress",          "rpe",             "srpe",            "duration_subj",  "duration_obj",
    "speed_km_h_mean", "speed_km_h_max",  "speed_km_h_std",  "sp_lir_p",       "sp_lir_t",
    "sp_lir_d",        "sp_mir_p",        "sp_mir_t",        "sp_mir_d",       "sp_hir_p",
    "sp_hir_t",        "sp_hir_d",        "sp_spr_p",        "sp_spr_t",       "sp_spr_d",
    "distance",        "distance_per_min"};

constexpr std::array<Field, 4> kZoneProportions = {Field::sp_lir_p, Field::sp_mir_p,
                                                   Field::sp_hir_p, Field::sp_spr_p};

constexpr double kTolerance = 1e-6;

void derive_distance_per_min(PlayerDay& day) {
    const auto& dist = day[Field::distance];
    const auto& dur = day[Field::duration_obj];
    if (!day[Field::distance_per_min] && dist && dur && *dur > 0.0)
        day[Field::distance_per_min] = *dist / *dur;
}

}  // namespace

std::string_view field_name(Field f) { return kFieldNames[field_index(f)]; }

std::optional<Field> field_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kFieldCount; ++i)
        if (kFieldNames[i] == name) return static_cast<Field>(i);
    return std::nullopt;
}

bool is_objective(Field f) { return field_index(f) >= field_index(Field::duration_obj); }

std::vector<std::string> validate(const PlayerDay& day) {
    std::vector<std::string> problems;
    double zone_sum = 0.0;
    for (Field f : kZoneProportions) {
        if (const auto& v = day[f]) {
            if (*v < 0.0 || *v > 1.0)
                problems.push_back(std::string(field_name(f)) + " outside [0,1]");
            zone_sum += *v;
        }
    }
    if (zone_sum > 1.0 + kTolerance) problems.push_back("speed-zone proportions sum above 1");
    if (day[Field::duration_obj] && *day[Field::duration_obj] < 0.0)
        problems.push_back("negative duration_obj");
    if (day[Field::distance] && *day[Field::distance] < 0.0) problems.push_back("negative distance");
    const auto& dist = day[Field::distance];
    const auto& dur = day[Field::duration_obj];
    const auto& dpm = day[Field::distance_per_min];
    if (dist && dur && dpm && *dur > 0.0) {
        const double expected = *dist / *dur;
        if (std::abs(*dpm - expected) > kTolerance * std::max(1.0, std::abs(expected)))
            problems.push_back("distance_per_min inconsistent with distance / duration_obj");
    }
    return problems;
}

std::string_view to_string(InjuryType t) { return t == InjuryType::acute ? "acute" : "overuse"; }

std::optional<InjuryType> injury_type_from_string(std::string_view s) {
    if (s == "acute") return InjuryType::acute;
    if (s == "overuse") return InjuryType::overuse;
    return std::nullopt;
}

MonitoringTable parse_monitoring_text(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const auto id_col = table.column("player_id");
    const auto date_col = table.column("date");
    if (!id_col || !date_col) {
        std::string missing;
        if (!id_col) missing += " player_id";
        if (!date_col) missing += " date";
        throw SchemaError("monitoring file lacks mandatory column(s):" + missing);
    }

    MonitoringTable out;
    std::vector<std::pair<std::size_t, Field>> mapped;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == *id_col || c == *date_col) continue;
        if (auto f = field_from_name(table.header[c]))
            mapped.emplace_back(c, *f);
        else
            out.ignored_columns.push_back(table.header[c]);
    }

    out.rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        auto cell = [&](std::size_t c) -> std::string_view {
            return c < cells.size() ? std::string_view(cells[c]) : std::string_view();
        };
        PlayerDay day;
        day.player_id = std::string(cell(*id_col));
        if (day.player_id.empty()) throw RowError(r, "empty player_id");
        const auto date = Date::parse(cell(*date_col));
        if (!date) throw RowError(r, "unparseable date '" + std::string(cell(*date_col)) + "'");
        day.date = *date;
        for (auto [c, f] : mapped) {
            const auto text_value = cell(c);
            if (text_value.empty()) continue;
            const auto v = csv::parse_number(text_value);
            if (!v)
                throw RowError(r, "non-numeric " + std::string(field_name(f)) + " '" +
                                      std::string(text_value) + "'");
            day[f] = *v;
        }
        derive_distance_per_min(day);
        if (auto problems = validate(day); !problems.empty()) throw RowError(r, problems.front());
        out.rows.push_back(std::move(day));
    }
    return out;
}

MonitoringTable parse_monitoring_csv(const std::filesystem::path& path) {
    return parse_monitoring_text(csv::read_file(path));
}

std::vector<InjuryEvent> parse_injury_text(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const auto id_col = table.column("player_id");
    const auto date_col = table.column("date");
    const auto type_col = table.column("injury_type");
    const auto part_col = table.column("body_part");
    if (!id_col || !date_col || !type_col || !part_col)
        throw SchemaError("injury file needs player_id, date, injury_type, body_part columns");

    std::vector<InjuryEvent> events;
    events.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        auto cell = [&](std::size_t c) -> std::string {
            return c < cells.size() ? cells[c] : std::string();
        };
        InjuryEvent ev;
        ev.player_id = cell(*id_col);
        if (ev.player_id.empty()) throw RowError(r, "empty player_id");
        const auto date = Date::parse(cell(*date_col));
        if (!date) throw RowError(r, "unparseable date '" + cell(*date_col) + "'");
        ev.date = *date;
        const auto type = injury_type_from_string(cell(*type_col));
        if (!type) throw RowError(r, "unknown injury_type '" + cell(*type_col) + "'");
        ev.type = *type;
        ev.body_part = cell(*part_col);
        events.push_back(std::move(ev));
    }
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.player_id != b.player_id) return a.player_id < b.player_id;
        return a.date < b.date;
    });
    return events;
}

std::vector<InjuryEvent> parse_injury_reports(const std::filesystem::path& path) {
    return parse_injury_text(csv::read_file(path));
}

std::string_view to_string(CleaningRule r) {
    switch (r) {
        case CleaningRule::max_speed: return "max_speed";
        case CleaningRule::session_duration: return "session_duration";
        case CleaningRule::distance: return "distance";
    }
    return "?";
}

CleanResult clean(std::span<const PlayerDay> records) {
    CleanResult out;
    out.report.input_rows = records.size();
    out.records.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PlayerDay& day = records[i];
        std::optional<Rejection> rejection;
        if (const auto& v = day[Field::speed_km_h_max]; v && *v > kMaxSpeedKmH)
            rejection = Rejection{i, CleaningRule::max_speed, *v};
        else if (const auto& d = day[Field::duration_obj]; d && *d > kMaxSessionMinutes)
            rejection = Rejection{i, CleaningRule::session_duration, *d};
        else if (const auto& km = day[Field::distance]; km && *km > kMaxDistanceKm)
            rejection = Rejection{i, CleaningRule::distance, *km};

        if (rejection) {
            ++out.report.counts[static_cast<std::size_t>(rejection->rule)];
            out.report.rejections.push_back(*rejection);
        } else {
            out.records.push_back(day);
        }
    }
    out.report.retained = out.records.size();
    return out;
}

std::string rejections_csv(const CleaningReport& report) {
    csv::Writer w({"row_index", "rule", "value"});
    for (const auto& r : report.rejections)
        w.row({std::to_string(r.row), std::string(to_string(r.rule)), csv::format_number(r.value)});
    return w.str();
}

std::string monitoring_csv(std::span<const PlayerDay> records) {
    std::vector<std::string> header = {"player_id", "date"};
    for (auto name : kFieldNames) header.emplace_back(name);
    csv::Writer w(header);
    std::vector<std::string> row;
    for (const auto& day : records) {
        row.clear();
        row.push_back(day.player_id);
        row.push_back(day.date.iso());
        for (const auto& v : day.fields) row.push_back(v ? csv::format_number(*v) : std::string());
        w.row(row);
    }
    return w.str();
}

std::string injuries_csv(std::span<const InjuryEvent> injuries) {
    csv::Writer w({"player_id", "date", "injury_type", "body_part"});
    for (const auto& ev : injuries)
        w.row({ev.player_id, ev.date.iso(), std::string(to_string(ev.type)), ev.body_part});
    return w.str();
}

}  // namespace injurycast
