#include "injurycast/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "injurycast/csv.hpp"
#include "injurycast/errors.hpp"
#include "injurycast/explain.hpp"
#include "injurycast/features.hpp"

namespace injurycast {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        const auto end = pos == std::string_view::npos ? s.size() : pos;
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

const ConfigKey* find_key(std::string_view name) {
    const auto dot = name.find('.');
    for (const auto& k : config_keys()) {
        if (dot == std::string_view::npos ? k.key == name
                                          : (k.section == name.substr(0, dot) && k.key == name.substr(dot + 1)))
            return &k;
    }
    return nullptr;
}

std::string full_name(const ConfigKey& k) { return k.section + "." + k.key; }

class Reader {
public:
    Reader(const std::map<std::string, std::string>& v, std::vector<std::string>& errs)
        : v_(v), errs_(errs) {}

    const std::string& str(const std::string& key) const { return v_.at(key); }

    double real(const std::string& key) const {
        const auto n = csv::parse_number(str(key));
        if (!n) errs_.push_back(key + ": expected a number, got '" + str(key) + "'");
        return n.value_or(0.0);
    }

    int integer(const std::string& key) const {
        const auto n = csv::parse_number(str(key));
        if (!n || *n != static_cast<double>(static_cast<long long>(*n)) || std::abs(*n) > 1e9) {
            errs_.push_back(key + ": expected an integer, got '" + str(key) + "'");
            return 0;
        }
        return static_cast<int>(*n);
    }

    std::uint64_t seed(const std::string& key) const {
        const auto& s = str(key);
        std::uint64_t out = 0;
        const auto* end = s.data() + s.size();
        const auto [ptr, ec] = std::from_chars(s.data(), end, out);
        if (ec != std::errc{} || ptr != end || s.empty()) errs_.push_back(key + ": expected a non-negative integer seed, got '" + s + "'");
        return out;
    }

    bool boolean(const std::string& key) const {
        const auto& s = str(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        errs_.push_back(key + ": expected true or false, got '" + s + "'");
        return false;
    }

    std::vector<int> int_list(const std::string& key) const {
        std::vector<int> out;
        for (const auto& item : split_list(str(key), ',')) {
            const auto n = csv::parse_number(item);
            if (!n || *n != static_cast<double>(static_cast<int>(*n))) {
                errs_.push_back(key + ": expected a comma-separated integer list, got '" + str(key) + "'");
                return {};
            }
            out.push_back(static_cast<int>(*n));
        }
        return out;
    }

private:
    const std::map<std::string, std::string>& v_;
    std::vector<std::string>& errs_;
};

template <typename Fn>
void collect(std::vector<std::string>& errs, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        errs.insert(errs.end(), e.messages().begin(), e.messages().end());
    }
}

ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json header_json(const RunConfig& cfg) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["run_id"] = effective_run_id(cfg);
    return j;
}

ordered_json data_json(const RunConfig& cfg, const PreparedData& d) {
    ordered_json rejected;
    for (auto r : {CleaningRule::max_speed, CleaningRule::session_duration, CleaningRule::distance})
        rejected[std::string(to_string(r))] = d.cleaning.count(r);
    ordered_json j;
    j["input_rows"] = d.input_rows;
    j["retained_rows"] = d.cleaning.retained;
    j["rejected"] = rejected;
    j["players"] = d.panel.n_players();
    j["injuries"] = d.injuries.size();
    j["impute"] = std::string(to_string(cfg.impute));
    j["features"] = d.panel.feature_names();
    j["dropped_features"] = d.dropped;
    return j;
}

ordered_json metrics_block(const BinaryMetrics& m) {
    ordered_json j;
    j["f1"] = opt_json(m.f1);
    j["precision"] = opt_json(m.precision);
    j["recall"] = opt_json(m.recall);
    j["auc"] = opt_json(m.auc);
    j["incomputable"] = ordered_json::array();
    if (!m.f1) j["incomputable"].push_back("f1");
    if (!m.precision) j["incomputable"].push_back("precision");
    if (!m.recall) j["incomputable"].push_back("recall");
    if (!m.auc) j["incomputable"].push_back("auc");
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    return j;
}

std::size_t count_events(const std::vector<SurvivalSample>& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](const auto& x) { return x.event == 1; }));
}

ordered_json holdout_json(const DeepHitHoldout& h) {
    ordered_json j;
    j["scheme"] = "chronological";
    j["n_train"] = h.train.size();
    j["n_test"] = h.test.size();
    j["n_test_events"] = count_events(h.test);
    j["test_start"] = h.test.empty() ? "" : h.test.front().anchor_date.iso();
    j["c_index"] = opt_json(h.c_index);
    j["c_index_incomputable"] = !h.c_index.has_value();
    j["best_epoch"] = h.history.best_epoch;
    j["epochs_run"] = h.history.train_loss.size();
    j["final_train_loss"] = h.history.train_loss.empty() ? ordered_json(nullptr)
                                                         : ordered_json(h.history.train_loss.back());
    return j;
}

ordered_json baseline_json(const BaselineHoldout& b) {
    ordered_json j;
    j["scheme"] = "chronological";
    j["n_train"] = b.split.train.size();
    j["n_valid"] = b.split.valid.size();
    ordered_json params;
    for (const auto& [k, v] : b.params) params[k] = v;
    j["params"] = params;
    j["binary"] = metrics_block(b.metrics);
    j["c_index"] = opt_json(b.c_index);
    j["c_index_incomputable"] = !b.c_index.has_value();
    return j;
}

ordered_json lopo_json(const LopoReport& r) {
    ordered_json j;
    j["scheme"] = "lopo";
    j["median"] = opt_json(r.median);
    j["iqr"] = opt_json(r.iqr);
    j["r_sessions"] = opt_json(r.r_sessions);
    j["r_injuries"] = opt_json(r.r_injuries);
    ordered_json folds = ordered_json::array();
    for (const auto& p : r.players) {
        ordered_json f;
        f["player_id"] = p.player_id;
        f["c_index"] = opt_json(p.c_index);
        f["incomputable"] = !p.c_index.has_value();
        f["n_samples"] = p.n_samples;
        f["n_sessions_tracked"] = p.n_sessions_tracked;
        f["n_injuries"] = p.n_injuries;
        folds.push_back(std::move(f));
    }
    j["folds"] = std::move(folds);
    return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string risk_curves_json(const RunConfig& cfg, const DeepHitModel& model, const FeaturePanel& panel) {
    ordered_json j = header_json(cfg);
    j["horizon"] = model.config.bins;
    ordered_json records = ordered_json::array();
    for (const auto& t : panel.tracks()) {
        for (const auto& r : daily_risk_series(model, panel, t.player_id())) {
            ordered_json rec;
            rec["player_id"] = t.player_id();
            rec["date"] = r.date.iso();
            rec["pmf"] = r.curve.pmf;
            rec["cif"] = r.curve.cif;
            rec["risk_score"] = risk_score(r.curve);
            records.push_back(std::move(rec));
        }
    }
    j["records"] = std::move(records);
    return dump(j);
}

struct ShapArtifacts {
    std::string shap_json;
    std::optional<std::string> season_csv;
};

ShapArtifacts explain_artifacts(const RunConfig& cfg, const DeepHitHoldout& h, const FeaturePanel& panel) {
    std::vector<std::vector<double>> rows;
    rows.reserve(h.train.size());
    for (const auto& s : h.train) rows.push_back(s.x);
    const ExplainContext ctx{h.model, sample_background(rows, cfg.background, cfg.shap.seed), cfg.shap};

    std::vector<std::string> players;
    if (!cfg.explain_player.empty()) {
        if (!panel.player_index(cfg.explain_player))
            throw ConfigError("explain.explain_player: unknown player '" + cfg.explain_player + "'");
        players.push_back(cfg.explain_player);
    } else {
        for (const auto& t : panel.tracks()) players.push_back(t.player_id());
    }

    ordered_json j = header_json(cfg);
    j["explained"] = "risk_score";
    ordered_json records = ordered_json::array();
    for (const auto& p : players) {
        const auto series = daily_risk_series(h.model, panel, p);
        if (series.empty()) continue;
        const auto peak = std::max_element(series.begin(), series.end(), [](const auto& a, const auto& b) {
            return risk_score(a.curve) < risk_score(b.curve);
        });
        const Attribution a = day_explanation(ctx, panel, p, peak->date);
        ordered_json rec;
        rec["player_id"] = a.player_id;
        rec["date"] = a.date.iso();
        rec["base_value"] = a.base_value;
        rec["prediction"] = a.prediction;
        rec["feature_names"] = a.feature_names;
        rec["phi"] = a.phi;
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);

    ShapArtifacts out{dump(j), std::nullopt};
    if (!cfg.season_player.empty()) {
        if (!panel.player_index(cfg.season_player))
            throw ConfigError("explain.season_player: unknown player '" + cfg.season_player + "'");
        csv::Writer w({"rank", "feature", "mean_abs_phi"});
        int rank = 1;
        for (const auto& fi : season_importance(ctx, panel, cfg.season_player))
            w.row({std::to_string(rank++), fi.feature, csv::format_number(fi.mean_abs_phi)});
        out.season_csv = w.str();
    }
    return out;
}

std::string history_csv(const TrainHistory& h) {
    csv::Writer w({"epoch", "train_loss", "validation_nll"});
    for (std::size_t e = 0; e < h.train_loss.size(); ++e)
        w.row({std::to_string(e), csv::format_number(h.train_loss[e]),
               e < h.validation_nll.size() ? csv::format_number(h.validation_nll[e]) : ""});
    return w.str();
}

std::string importances_csv(const std::vector<std::string>& names, const std::vector<double>& imp) {
    csv::Writer w({"feature", "importance"});
    for (std::size_t f = 0; f < names.size() && f < imp.size(); ++f)
        w.row({names[f], csv::format_number(imp[f])});
    return w.str();
}

void write(const std::filesystem::path& dir, const std::string& name, std::string_view content) {
    csv::write_file_atomic(dir / name, content);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys{
        {"data", "monitoring", "", "monitoring CSV path"},
        {"data", "injuries", "", "injury report CSV path"},
        {"data", "output_root", "", "directory holding run directories"},
        {"data", "run_id", "", "run directory name (default: config hash)"},
        {"pipeline", "impute", "bespoke", "none | median | bespoke | linear"},
        {"pipeline", "lookback", "21", "look-back window in days"},
        {"pipeline", "horizon", "7", "prediction horizon in days"},
        {"pipeline", "post_injury_exclusion", "7", "days after an injury without anchors"},
        {"pipeline", "split", "chronological", "chronological | lopo"},
        {"pipeline", "train_fraction", "0.8", "chronological training share"},
        {"pipeline", "drop_threshold", "0.5", "drop features missing in more than this share"},
        {"pipeline", "window_sweep", "", "comma-separated windows for the baseline sweep"},
        {"model", "family", "deephit", "deephit | logreg | rf | gbt"},
        {"model", "hidden", "32", "comma-separated hidden layer widths"},
        {"model", "activation", "tanh", "relu | tanh"},
        {"model", "dropout", "0.3", "dropout rate"},
        {"model", "init_scale", "1", "weight initialisation scale"},
        {"model", "alpha", "1", "likelihood weight"},
        {"model", "beta", "0.2", "ranking weight"},
        {"model", "sigma", "0.1", "ranking kernel width"},
        {"model", "learning_rate", "0.01", "initial step size"},
        {"model", "lr_decay", "0.99", "per-epoch step decay"},
        {"model", "weight_decay", "0.1", "L2 shrinkage per step"},
        {"model", "batch_size", "64", "mini-batch size"},
        {"model", "epochs", "100", "maximum epochs"},
        {"model", "patience", "10", "early-stopping patience"},
        {"model", "validation_fraction", "0.1", "trailing training share for early stopping"},
        {"baseline", "baseline_params", "", "overrides such as n_trees=200,max_depth=6"},
        {"baseline", "grid_search", "false", "run the default grid"},
        {"seeds", "synth_seed", "42", "synthetic cohort seed"},
        {"seeds", "model_seed", "7", "network initialisation seed"},
        {"seeds", "train_seed", "11", "mini-batch and dropout seed"},
        {"seeds", "baseline_seed", "1", "oversampling and tree seed"},
        {"seeds", "shap_seed", "2024", "background and coalition seed"},
        {"scorer", "weight_f1", "0.4", "F1 weight"},
        {"scorer", "weight_recall", "0.3", "recall weight"},
        {"scorer", "weight_precision", "0.15", "precision weight"},
        {"scorer", "weight_auc", "0.15", "AUC weight"},
        {"simulate", "players", "30", "synthetic players"},
        {"simulate", "days", "300", "synthetic days"},
        {"simulate", "start_date", "2020-01-01", "first synthetic date"},
        {"simulate", "base_rate", "0.001", "baseline daily injury probability"},
        {"simulate", "noise_sd", "0.3", "measurement noise (marginal SD units)"},
        {"simulate", "persistence", "0.97", "AR(1) coefficient"},
        {"simulate", "player_offset_share", "0.5", "variance share of per-player offsets"},
        {"simulate", "subjective_missing_rate", "0.2", "daily questionnaire missingness"},
        {"simulate", "objective_missing_rate", "0.15", "daily tracking missingness"},
        {"explain", "background", "100", "background rows"},
        {"explain", "coalitions", "2048", "coalition budget when sampling"},
        {"explain", "explain_player", "", "explain only this player's peak-risk day"},
        {"explain", "season_player", "", "write season importance for this player"},
    };
    return keys;
}

std::string flag_name(std::string_view key) {
    std::string out(key);
    std::replace(out.begin(), out.end(), '_', '-');
    return out;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
    std::map<std::string, std::string> out;
    std::vector<std::string> errs;
    std::string section;
    std::istringstream is{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errs.push_back("line " + std::to_string(line_no) + ": unterminated section header");
                continue;
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errs.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        const auto* k = find_key(key);
        if (!k || k->section != section) {
            errs.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "' in section [" +
                           section + "]");
            continue;
        }
        out[full_name(*k)] = value;
    }
    if (!errs.empty()) throw ConfigError(errs);
    return out;
}

RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> errs;
    std::map<std::string, std::string> v;
    for (const auto& k : config_keys()) v[full_name(k)] = k.default_value;
    for (const auto* layer : {&file_values, &overrides}) {
        for (const auto& [name, value] : *layer) {
            const auto* k = find_key(name);
            if (!k) {
                errs.push_back("unknown config key '" + name + "'");
                continue;
            }
            v[full_name(*k)] = trim(value);
        }
    }

    const Reader r(v, errs);
    RunConfig c;
    c.monitoring = r.str("data.monitoring");
    c.injuries = r.str("data.injuries");
    c.output_root = r.str("data.output_root");
    c.run_id = r.str("data.run_id");
    if (c.run_id.find_first_of("/\\") != std::string::npos || c.run_id == "." || c.run_id == "..")
        errs.push_back("data.run_id: must be a plain directory name");

    if (const auto m = impute_method_from_string(r.str("pipeline.impute")))
        c.impute = *m;
    else
        errs.push_back("pipeline.impute: expected none, median, bespoke or linear, got '" +
                       r.str("pipeline.impute") + "'");
    c.survival.lookback = r.integer("pipeline.lookback");
    c.survival.horizon = r.integer("pipeline.horizon");
    c.survival.post_injury_exclusion = r.integer("pipeline.post_injury_exclusion");
    if (c.survival.lookback < 1) errs.emplace_back("pipeline.lookback: must be >= 1");
    if (c.survival.horizon < 1) errs.emplace_back("pipeline.horizon: must be >= 1");
    if (c.survival.post_injury_exclusion < 0) errs.emplace_back("pipeline.post_injury_exclusion: must be >= 0");
    c.split = r.str("pipeline.split");
    if (c.split != "chronological" && c.split != "lopo")
        errs.push_back("pipeline.split: expected chronological or lopo, got '" + c.split + "'");
    c.train_fraction = r.real("pipeline.train_fraction");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        errs.emplace_back("pipeline.train_fraction: must lie in (0, 1)");
    c.drop_threshold = r.real("pipeline.drop_threshold");
    if (!(c.drop_threshold >= 0.0 && c.drop_threshold <= 1.0))
        errs.emplace_back("pipeline.drop_threshold: must lie in [0, 1]");
    c.window_sweep = r.int_list("pipeline.window_sweep");
    for (int w : c.window_sweep)
        if (w < 1) errs.emplace_back("pipeline.window_sweep: windows must be >= 1");

    c.family = r.str("model.family");
    const bool baseline = family_from_string(c.family).has_value();
    if (c.family != "deephit" && !baseline)
        errs.push_back("model.family: expected deephit, logreg, rf or gbt, got '" + c.family + "'");
    c.mlp.hidden_widths = r.int_list("model.hidden");
    if (const auto a = activation_from_string(r.str("model.activation")))
        c.mlp.activation = *a;
    else
        errs.push_back("model.activation: expected relu or tanh, got '" + r.str("model.activation") + "'");
    c.mlp.dropout_rate = r.real("model.dropout");
    c.mlp.weight_init_scale = r.real("model.init_scale");
    c.mlp.seed = r.seed("seeds.model_seed");
    c.deephit.bins = c.survival.horizon;
    c.deephit.alpha = r.real("model.alpha");
    c.deephit.beta = r.real("model.beta");
    c.deephit.sigma = r.real("model.sigma");
    c.deephit.learning_rate = r.real("model.learning_rate");
    c.deephit.lr_decay = r.real("model.lr_decay");
    c.deephit.weight_decay = r.real("model.weight_decay");
    c.deephit.batch_size = r.integer("model.batch_size");
    c.deephit.epochs = r.integer("model.epochs");
    c.deephit.patience = r.integer("model.patience");
    c.deephit.validation_fraction = r.real("model.validation_fraction");
    c.deephit.seed = r.seed("seeds.train_seed");
    if (c.family == "deephit") {
        collect(errs, [&] { validate(c.mlp); });
        if (c.deephit.bins >= 1) collect(errs, [&] { validate(c.deephit); });
    }

    for (const auto& item : split_list(r.str("baseline.baseline_params"), ',')) {
        const auto eq = item.find('=');
        const auto value = eq == std::string::npos ? std::nullopt
                                                   : csv::parse_number(trim(std::string_view(item).substr(eq + 1)));
        if (!value) {
            errs.push_back("baseline.baseline_params: expected name=number, got '" + item + "'");
            continue;
        }
        c.baseline_params[trim(std::string_view(item).substr(0, eq))] = *value;
    }
    if (baseline) {
        const auto known = default_params(*family_from_string(c.family));
        for (const auto& [k, _] : c.baseline_params)
            if (!known.count(k))
                errs.push_back("baseline.baseline_params: unknown parameter '" + k + "' for " + c.family);
    } else if (!c.baseline_params.empty() && c.family == "deephit") {
        errs.emplace_back("baseline.baseline_params: only valid with a baseline family");
    }
    c.grid_search = r.boolean("baseline.grid_search");
    c.baseline_seed = r.seed("seeds.baseline_seed");

    c.scorer.f1 = r.real("scorer.weight_f1");
    c.scorer.recall = r.real("scorer.weight_recall");
    c.scorer.precision = r.real("scorer.weight_precision");
    c.scorer.auc = r.real("scorer.weight_auc");
    collect(errs, [&] { validate(c.scorer); });

    c.players = r.integer("simulate.players");
    c.days = r.integer("simulate.days");
    if (c.players < 2) errs.emplace_back("simulate.players: need at least two players");
    if (c.days < 1) errs.emplace_back("simulate.days: must be >= 1");
    if (const auto d = Date::parse(r.str("simulate.start_date")))
        c.start_date = *d;
    else
        errs.push_back("simulate.start_date: expected YYYY-MM-DD, got '" + r.str("simulate.start_date") + "'");
    c.hazard = default_hazard_spec();
    c.hazard.base_rate = r.real("simulate.base_rate");
    c.hazard.noise_sd = r.real("simulate.noise_sd");
    c.hazard.persistence = r.real("simulate.persistence");
    c.hazard.player_offset_share = r.real("simulate.player_offset_share");
    c.hazard.subjective_missing_rate = r.real("simulate.subjective_missing_rate");
    c.hazard.objective_missing_rate = r.real("simulate.objective_missing_rate");
    c.hazard.seed = r.seed("seeds.synth_seed");
    collect(errs, [&] { validate(c.hazard); });

    const int background = r.integer("explain.background");
    if (background < 1) errs.emplace_back("explain.background: must be >= 1");
    c.background = static_cast<std::size_t>(std::max(background, 1));
    c.shap.n_coalitions = r.integer("explain.coalitions");
    if (c.shap.n_coalitions < 1) errs.emplace_back("explain.coalitions: must be >= 1");
    c.shap.seed = r.seed("seeds.shap_seed");
    c.explain_player = r.str("explain.explain_player");
    c.season_player = r.str("explain.season_player");

    if (!errs.empty()) throw ConfigError(errs);
    c.values = std::move(v);
    return c;
}

void check_inputs(const RunConfig& cfg) {
    std::vector<std::string> errs;
    auto check = [&](const std::filesystem::path& p, const char* key) {
        if (p.empty())
            errs.push_back(std::string(key) + ": no path given");
        else if (!std::filesystem::is_regular_file(p))
            errs.push_back(std::string(key) + ": file not found: " + p.string());
    };
    check(cfg.monitoring, "data.monitoring");
    check(cfg.injuries, "data.injuries");
    if (!errs.empty()) throw ConfigError(errs);
}

std::string canonical_config_text(const RunConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& k : config_keys()) {
        if (k.section != section) {
            if (!section.empty()) out += '\n';
            section = k.section;
            out += "[" + section + "]\n";
        }
        out += k.key + " = " + cfg.values.at(full_name(k)) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& k : config_keys()) {
        if (k.key == "run_id" || k.key == "output_root") continue;
        for (char ch : full_name(k) + "=" + cfg.values.at(full_name(k)) + "\n") {
            h ^= static_cast<unsigned char>(ch);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string effective_run_id(const RunConfig& cfg) {
    return cfg.run_id.empty() ? config_hash(cfg) : cfg.run_id;
}

std::filesystem::path run_directory(const RunConfig& cfg) {
    std::filesystem::path root = cfg.output_root;
    if (root.empty()) {
        const char* env = std::getenv(kRunsRootEnv);
        root = env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
    }
    return root / effective_run_id(cfg);
}

bool is_deephit(const RunConfig& cfg) { return cfg.family == "deephit"; }

Family baseline_family(const RunConfig& cfg) {
    const auto f = family_from_string(cfg.family);
    if (!f) throw ConfigError("model.family: '" + cfg.family + "' is not a baseline family");
    return *f;
}

PreparedData prepare(const RunConfig& cfg, std::vector<PlayerDay> raw, std::vector<InjuryEvent> injuries,
                     std::vector<std::string> ignored_columns) {
    PreparedData d;
    d.input_rows = raw.size();
    d.ignored_columns = std::move(ignored_columns);
    auto cleaned = clean(raw);
    d.cleaning = std::move(cleaned.report);
    d.records = std::move(cleaned.records);
    d.injuries = std::move(injuries);
    if (d.records.empty()) throw DataError("no monitoring rows remain after cleaning");
    d.features = build_feature_panel(d.records, d.injuries);
    const FeaturePanel imputed = impute(d.features, cfg.impute);
    d.diagnostics = diagnostics(d.features, imputed, d.injuries);
    auto kept = drop_high_missingness(imputed, cfg.drop_threshold);
    d.dropped = std::move(kept.dropped);
    if (kept.panel.n_features() == 0) throw DataError("every feature exceeds the missingness threshold after imputation");
    d.panel = std::move(kept.panel);
    return d;
}

PreparedData load_and_prepare(const RunConfig& cfg) {
    check_inputs(cfg);
    auto table = parse_monitoring_csv(cfg.monitoring);
    auto injuries = parse_injury_reports(cfg.injuries);
    return prepare(cfg, std::move(table.rows), std::move(injuries), std::move(table.ignored_columns));
}

DeepHitModel fit_deephit(const RunConfig& cfg, const FeaturePanel& panel,
                         std::vector<SurvivalSample> train_raw, TrainHistory* history) {
    DeepHitModel m;
    m.scaler = fit_scaler_on(train_raw);
    apply_scaler_inplace(m.scaler, train_raw);
    auto res = train(train_raw, cfg.mlp, cfg.deephit);
    m.net = std::move(res.net);
    m.config = cfg.deephit;
    m.feature_names = panel.feature_names();
    m.lookback = cfg.survival.lookback;
    if (history) *history = std::move(res.history);
    return m;
}

DeepHitHoldout deephit_holdout(const RunConfig& cfg, const PreparedData& data) {
    auto samples = build_survival_samples(data.panel, data.injuries, cfg.survival);
    if (samples.empty()) throw DataError("no survival samples: tracks are shorter than the look-back window");
    auto split = chronological_split(std::move(samples), cfg.train_fraction);
    DeepHitHoldout h;
    h.model = fit_deephit(cfg, data.panel, split.train, &h.history);
    h.train = std::move(split.train);
    h.test = std::move(split.test);
    apply_scaler_inplace(h.model.scaler, h.train);
    apply_scaler_inplace(h.model.scaler, h.test);
    std::vector<int> times, events;
    for (const auto& s : h.test) {
        h.test_scores.push_back(risk_score(h.model.net.forward(s.x)));
        times.push_back(s.time_to_event);
        events.push_back(s.event);
    }
    h.c_index = c_index(h.test_scores, times, events);
    return h;
}

BaselineHoldout baseline_holdout(const RunConfig& cfg, const PreparedData& data) {
    const Family family = baseline_family(cfg);
    const auto binary = build_binary_samples(data.panel, data.injuries, cfg.survival.lookback, cfg.survival.horizon);
    if (binary.empty()) throw DataError("no binary samples: tracks are shorter than the look-back window");
    BaselineHoldout b;
    b.split = make_evaluation_split(binary, cfg.train_fraction, cfg.baseline_seed);
    b.params = default_params(family);
    for (const auto& [k, v] : cfg.baseline_params) b.params[k] = v;
    if (cfg.grid_search) {
        b.grid = grid_search(family, default_grid(family), b.split, cfg.scorer, cfg.baseline_seed);
        b.params = b.grid->best;
    }
    const Classifier clf = fit_classifier(family, b.params, b.split.train, cfg.baseline_seed);
    b.metrics = evaluate_classifier(clf, b.split.valid);
    b.importances = clf.importances();

    auto survival = build_survival_samples(data.panel, data.injuries, cfg.survival);
    if (!survival.empty()) {
        const auto split = chronological_split(std::move(survival), cfg.train_fraction);
        std::vector<double> scores;
        std::vector<int> times, events;
        for (const auto& s : split.test) {
            scores.push_back(clf.predict_proba(s.x));
            times.push_back(s.time_to_event);
            events.push_back(s.event);
        }
        b.c_index = c_index(scores, times, events);
    }
    return b;
}

std::map<std::string, PlayerStats> player_stats(const PreparedData& data) {
    std::map<std::string, PlayerStats> out;
    std::set<std::pair<std::string, int>> tracked;
    for (const auto& r : data.records) {
        bool objective = false;
        for (std::size_t f = 0; f < kFieldCount; ++f)
            if (is_objective(static_cast<Field>(f)) && r.fields[f]) objective = true;
        if (objective && tracked.insert({r.player_id, r.date.days()}).second) ++out[r.player_id].n_sessions_tracked;
    }
    for (const auto& inj : data.injuries) ++out[inj.player_id].n_injuries;
    return out;
}

LopoReport lopo(const RunConfig& cfg, const PreparedData& data) {
    const auto samples = build_survival_samples(data.panel, data.injuries, cfg.survival);
    if (samples.empty()) throw DataError("no survival samples: tracks are shorter than the look-back window");
    const auto folds = lopo_folds(samples);
    std::vector<std::string> players;
    for (const auto& f : folds) players.push_back(f.held_out);

    std::vector<BinarySample> binary;
    if (!is_deephit(cfg))
        binary = build_binary_samples(data.panel, data.injuries, cfg.survival.lookback, cfg.survival.horizon);

    auto evaluate_fold = [&](std::size_t i) {
        const auto& fold = folds[i];
        std::function<double(std::span<const double>)> score;
        DeepHitModel model;
        std::optional<Classifier> clf;
        if (is_deephit(cfg)) {
            model = fit_deephit(cfg, data.panel, fold.train);
            score = [&](std::span<const double> x) { return risk_score(model.predict(x)); };
        } else {
            std::vector<BinarySample> train;
            for (const auto& s : binary)
                if (s.player_id != fold.held_out) train.push_back(s);
            auto over = oversample_minority(train, cfg.baseline_seed);
            HyperParams params = default_params(baseline_family(cfg));
            for (const auto& [k, v] : cfg.baseline_params) params[k] = v;
            clf.emplace(fit_classifier(baseline_family(cfg), params, over.samples, cfg.baseline_seed));
            score = [&](std::span<const double> x) { return clf->predict_proba(x); };
        }
        FoldScores fs;
        for (const auto& s : fold.test) {
            fs.scores.push_back(score(s.x));
            fs.times.push_back(s.time_to_event);
            fs.events.push_back(s.event);
        }
        return fs;
    };
    return lopo_evaluate(players, evaluate_fold, player_stats(data));
}

std::filesystem::path run_command(std::string_view command, const RunConfig& cfg) {
    if (std::find(subcommands().begin(), subcommands().end(), command) == subcommands().end())
        throw ConfigError("unknown subcommand '" + std::string(command) + "'");
    const auto dir = run_directory(cfg);
    const bool simulate = command == "simulate";
    if (simulate) {
        std::vector<std::string> errs;
        if (cfg.monitoring.empty()) errs.emplace_back("data.monitoring: simulate needs an output path");
        if (cfg.injuries.empty()) errs.emplace_back("data.injuries: simulate needs an output path");
        if (!errs.empty()) throw ConfigError(errs);
    } else {
        check_inputs(cfg);
    }
    write(dir, "config.ini", canonical_config_text(cfg));

    if (simulate) {
        const auto cohort = generate(cfg.players, cfg.days, cfg.hazard, cfg.start_date);
        csv::write_file_atomic(cfg.monitoring, monitoring_csv(cohort.records));
        csv::write_file_atomic(cfg.injuries, injuries_csv(cohort.injuries));
        write(dir, "synthetic_truth.csv", panel_csv(cohort.truth));
        ordered_json j = header_json(cfg);
        j["players"] = cfg.players;
        j["days"] = cfg.days;
        j["records"] = cohort.records.size();
        j["injuries"] = cohort.injuries.size();
        j["monitoring"] = cfg.monitoring.string();
        j["injury_reports"] = cfg.injuries.string();
        write(dir, "simulation.json", dump(j));
        return dir;
    }

    if (command == "ingest") {
        const auto table = parse_monitoring_csv(cfg.monitoring);
        const auto injuries = parse_injury_reports(cfg.injuries);
        const auto cleaned = clean(table.rows);
        write(dir, "rejections.csv", rejections_csv(cleaned.report));
        ordered_json j = header_json(cfg);
        j["input_rows"] = cleaned.report.input_rows;
        j["retained_rows"] = cleaned.report.retained;
        for (auto r : {CleaningRule::max_speed, CleaningRule::session_duration, CleaningRule::distance})
            j["rejected"][std::string(to_string(r))] = cleaned.report.count(r);
        j["ignored_columns"] = table.ignored_columns;
        j["injuries"] = injuries.size();
        write(dir, "ingest.json", dump(j));
        return dir;
    }

    const PreparedData data = load_and_prepare(cfg);
    if (command == "features") {
        write(dir, "features.csv", panel_csv(data.features));
        return dir;
    }
    if (command == "impute") {
        write(dir, "features_imputed.csv", panel_csv(data.panel));
        write(dir, "imputation_diagnostics.csv", diagnostics_csv(data.diagnostics));
        ordered_json j = header_json(cfg);
        j["method"] = std::string(to_string(cfg.impute));
        j["drop_threshold"] = cfg.drop_threshold;
        j["dropped"] = data.dropped;
        j["retained"] = data.panel.feature_names();
        write(dir, "imputation.json", dump(j));
        return dir;
    }
    if (command == "build") {
        const auto names = data.panel.feature_names();
        write(dir, "samples_survival.csv",
              survival_samples_csv(build_survival_samples(data.panel, data.injuries, cfg.survival), names));
        write(dir, "samples_binary.csv",
              binary_samples_csv(build_binary_samples(data.panel, data.injuries, cfg.survival.lookback,
                                                      cfg.survival.horizon),
                                 names));
        return dir;
    }
    if (command == "train") {
        if (is_deephit(cfg)) {
            const auto h = deephit_holdout(cfg, data);
            write(dir, "model.txt", checkpoint_text(h.model));
            write(dir, "training_history.csv", history_csv(h.history));
        } else {
            const auto b = baseline_holdout(cfg, data);
            if (b.grid) write(dir, "leaderboard.csv", leaderboard_csv(*b.grid));
            write(dir, "importances.csv", importances_csv(data.panel.feature_names(), b.importances));
            if (!cfg.window_sweep.empty())
                write(dir, "window_sweep.csv",
                      window_sweep_csv(window_sweep(baseline_family(cfg), b.params, data.panel, data.injuries,
                                                    cfg.window_sweep, cfg.train_fraction, cfg.scorer,
                                                    cfg.baseline_seed)));
        }
        return dir;
    }
    if (command == "explain") {
        if (!is_deephit(cfg)) throw ConfigError("explain: needs model.family = deephit");
        const auto h = deephit_holdout(cfg, data);
        const auto art = explain_artifacts(cfg, h, data.panel);
        write(dir, "shap.json", art.shap_json);
        if (art.season_csv) write(dir, "season_importance.csv", *art.season_csv);
        return dir;
    }

    const bool report = command == "report";
    const bool want_lopo = report || command == "lopo" || cfg.split == "lopo";
    const bool want_holdout = report || (command == "evaluate" && cfg.split == "chronological");
    ordered_json metrics = header_json(cfg);
    metrics["family"] = cfg.family;
    metrics["data"] = data_json(cfg, data);
    if (want_holdout) {
        if (is_deephit(cfg)) {
            const auto h = deephit_holdout(cfg, data);
            metrics["chronological"] = holdout_json(h);
            write(dir, "model.txt", checkpoint_text(h.model));
            write(dir, "risk_curves.json", risk_curves_json(cfg, h.model, data.panel));
            if (report) write(dir, "shap.json", explain_artifacts(cfg, h, data.panel).shap_json);
        } else {
            metrics["chronological"] = baseline_json(baseline_holdout(cfg, data));
        }
    }
    if (want_lopo) {
        const auto r = lopo(cfg, data);
        metrics["lopo"] = lopo_json(r);
        write(dir, "lopo_report.csv", lopo_report_csv(r));
    }
    write(dir, "metrics.json", dump(metrics));
    return dir;
}

}  // namespace injurycast
