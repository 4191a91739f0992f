#include "injurycast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "injurycast/csv.hpp"
#include "injurycast/errors.hpp"

namespace injurycast {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double get_param(const HyperParams& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_keys(Family family, const HyperParams& params) {
    const HyperParams defaults = default_params(family);
    std::vector<std::string> errs;
    for (const auto& [k, _] : params)
        if (!defaults.count(k))
            errs.push_back("unknown " + std::string(to_string(family)) + " hyperparameter '" + k + "'");
    if (!errs.empty()) throw ConfigError(errs);
}

std::vector<double> normalized(std::vector<double> v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0.0)
        for (double& x : v) x /= total;
    return v;
}

std::vector<std::vector<double>> rows_of(const std::vector<BinarySample>& samples) {
    std::vector<std::vector<double>> x;
    x.reserve(samples.size());
    for (const auto& s : samples) x.push_back(s.x);
    return x;
}

double mean_log_loss(std::span<const double> margins, const std::vector<BinarySample>& samples) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double z = margins[i];
        // log(1 + e^z) - y z, evaluated stably.
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        acc += softplus - samples[i].label * z;
    }
    return acc / static_cast<double>(samples.size());
}

std::string config_string(const HyperParams& p) {
    std::string s;
    for (const auto& [k, v] : p) {
        if (!s.empty()) s += ';';
        s += k + "=" + csv::format_number(v);
    }
    return s;
}

bool ranks_before(const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    const double fa = a.metrics.f1.value_or(0.0);
    const double fb = b.metrics.f1.value_or(0.0);
    if (fa != fb) return fa > fb;
    if (a.n_features != b.n_features) return a.n_features < b.n_features;
    return a.config < b.config;
}

double score_subset(Family family, const HyperParams& params, const EvaluationSplit& split,
                    std::vector<std::size_t> features, const ScorerWeights& weights,
                    std::uint64_t seed) {
    std::sort(features.begin(), features.end());
    const auto train = project(split.train, features);
    const auto valid = project(split.valid, features);
    const Classifier c = fit_classifier(family, params, train, seed);
    return weighted_score(evaluate_classifier(c, valid), weights);
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::logreg: return "logreg";
        case Family::random_forest: return "rf";
        case Family::gbt: return "gbt";
    }
    return "?";
}

std::optional<Family> family_from_string(std::string_view s) {
    if (s == "logreg") return Family::logreg;
    if (s == "rf" || s == "random_forest") return Family::random_forest;
    if (s == "gbt" || s == "xgboost") return Family::gbt;
    return std::nullopt;
}

void validate(const ScorerWeights& w) {
    std::vector<std::string> errs;
    if (w.f1 < 0 || w.recall < 0 || w.precision < 0 || w.auc < 0)
        errs.emplace_back("scorer weights must be >= 0");
    if (std::abs(w.f1 + w.recall + w.precision + w.auc - 1.0) > 1e-9)
        errs.emplace_back("scorer weights must sum to 1");
    if (!errs.empty()) throw ConfigError(errs);
}

double weighted_score(const BinaryMetrics& m, const ScorerWeights& w) {
    return w.f1 * m.f1.value_or(0.0) + w.recall * m.recall.value_or(0.0) +
           w.precision * m.precision.value_or(0.0) + w.auc * m.auc.value_or(0.0);
}

// --- logistic regression ----------------------------------------------------

double LogisticRegression::predict_proba(std::span<const double> x) const {
    return sigmoid(bias + dot(weights, x));
}

double logreg_objective(const LogisticRegression& m, const std::vector<BinarySample>& samples,
                        double l2) {
    std::vector<double> margins;
    margins.reserve(samples.size());
    for (const auto& s : samples) margins.push_back(m.bias + dot(m.weights, s.x));
    return mean_log_loss(margins, samples) + 0.5 * l2 * dot(m.weights, m.weights);
}

std::vector<double> logreg_gradient(const LogisticRegression& m,
                                    const std::vector<BinarySample>& samples, double l2) {
    const std::size_t nf = m.weights.size();
    std::vector<double> g(nf + 1, 0.0);
    const auto n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        const double r = m.predict_proba(s.x) - s.label;
        for (std::size_t f = 0; f < nf; ++f) g[f] += r * s.x[f] / n;
        g[nf] += r / n;
    }
    for (std::size_t f = 0; f < nf; ++f) g[f] += l2 * m.weights[f];
    return g;
}

LogisticRegression train_logreg(const std::vector<BinarySample>& samples, double l2, double lr,
                                int epochs, std::uint64_t /*seed*/) {
    if (l2 < 0 || lr < 0 || epochs < 0) throw ConfigError("logreg: l2, lr, epochs must be >= 0");
    LogisticRegression m;
    m.weights.assign(samples.empty() ? 0 : samples.front().x.size(), 0.0);
    if (samples.empty()) return m;
    for (int e = 0; e < epochs; ++e) {
        const auto g = logreg_gradient(m, samples, 0.0);
        for (std::size_t f = 0; f < m.weights.size(); ++f)
            m.weights[f] = (m.weights[f] - lr * g[f]) / (1.0 + lr * l2);
        m.bias -= lr * g.back();
    }
    return m;
}

// --- random forest ------------------------------------------------------------

double RandomForest::predict_proba(std::span<const double> x) const {
    if (trees.empty()) return 0.5;
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(x);
    return acc / static_cast<double>(trees.size());
}

RandomForest train_random_forest(const std::vector<BinarySample>& samples,
                                 const RandomForestParams& params, std::uint64_t seed) {
    if (params.n_trees < 0 || params.max_depth < 0 || params.min_leaf < 1)
        throw ConfigError("random forest: invalid tree parameters");
    RandomForest rf;
    if (samples.empty()) return rf;
    const auto x = rows_of(samples);
    const std::size_t nf = x.front().size();
    std::vector<double> y(samples.size()), ones(samples.size(), 1.0);
    for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i].label;

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.features_per_split = params.features_per_split > 0
                                ? params.features_per_split
                                : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(nf)))));
    rf.importance.assign(nf, 0.0);
    std::vector<std::size_t> rows(samples.size());
    for (int t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
            for (auto& r : rows) r = pick(rng);
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        rf.trees.push_back(grow_tree(x, y, ones, rows, SplitCriterion::gini, tp, rng, rf.importance));
    }
    rf.importance = normalized(std::move(rf.importance));
    return rf;
}

// --- gradient boosting --------------------------------------------------------

double GradientBoostedTrees::margin(std::span<const double> x) const {
    double m = base_margin;
    for (const auto& t : trees) m += learning_rate * t.predict(x);
    return m;
}

double GradientBoostedTrees::predict_proba(std::span<const double> x) const {
    return sigmoid(margin(x));
}

GradientBoostedTrees train_gbt(const std::vector<BinarySample>& samples, const GbtParams& params,
                               std::uint64_t seed) {
    if (params.n_rounds < 0 || params.max_depth < 0 || params.learning_rate < 0 ||
        params.lambda < 0)
        throw ConfigError("gbt: invalid parameters");
    GradientBoostedTrees m;
    m.learning_rate = params.learning_rate;
    if (samples.empty()) return m;
    const auto x = rows_of(samples);
    const std::size_t n = samples.size();
    double pos = 0.0;
    for (const auto& s : samples) pos += s.label;
    const double base_rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    m.base_margin = std::log(base_rate / (1.0 - base_rate));
    m.importance.assign(x.front().size(), 0.0);

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.lambda = params.lambda;
    tp.min_child_weight = params.min_child_weight;
    tp.min_leaf = params.min_leaf;

    std::vector<double> margins(n, m.base_margin), g(n), h(n);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::mt19937_64 rng(seed);
    m.loss_path.push_back(mean_log_loss(margins, samples));
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margins[i]);
            g[i] = p - samples[i].label;
            h[i] = p * (1.0 - p);
        }
        DecisionTree tree = grow_tree(x, g, h, rows, SplitCriterion::newton, tp, rng, m.importance);
        for (std::size_t i = 0; i < n; ++i) margins[i] += params.learning_rate * tree.predict(x[i]);
        m.trees.push_back(std::move(tree));
        m.loss_path.push_back(mean_log_loss(margins, samples));
    }
    m.importance = normalized(std::move(m.importance));
    return m;
}

// --- family-agnostic wrapper --------------------------------------------------

Classifier::Classifier(Family family, ScalerStats scaler, Model model)
    : family_(family), scaler_(std::move(scaler)), model_(std::move(model)) {}

double Classifier::predict_proba(std::span<const double> raw) const {
    const auto x = apply_scaler(scaler_, raw);
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, model_);
}

std::vector<double> Classifier::importances() const {
    if (const auto* lr = std::get_if<LogisticRegression>(&model_)) {
        std::vector<double> out;
        for (double w : lr->weights) out.push_back(std::abs(w));
        return out;
    }
    if (const auto* rf = std::get_if<RandomForest>(&model_)) return rf->importance;
    return std::get<GradientBoostedTrees>(model_).importance;
}

HyperParams default_params(Family family) {
    switch (family) {
        case Family::logreg:
            return {{"l2", 0.01}, {"learning_rate", 0.5}, {"epochs", 300}};
        case Family::random_forest:
            return {{"n_trees", 100}, {"max_depth", 8}, {"min_leaf", 5},
                    {"features_per_split", 0}, {"bootstrap", 1}};
        case Family::gbt:
            return {{"n_rounds", 100}, {"learning_rate", 0.1}, {"max_depth", 3},
                    {"lambda", 1.0}, {"min_child_weight", 1e-3}, {"min_leaf", 1}};
    }
    return {};
}

GridSpec default_grid(Family family) {
    switch (family) {
        case Family::logreg:
            return {{"l2", {0.001, 0.01, 0.1}}};
        case Family::random_forest:
            return {{"n_trees", {50, 100}}, {"max_depth", {4, 8}}, {"min_leaf", {5, 20}}};
        case Family::gbt:
            return {{"n_rounds", {50, 100}}, {"learning_rate", {0.05, 0.1}}, {"max_depth", {2, 3}}};
    }
    return {};
}

Classifier fit_classifier(Family family, const HyperParams& params,
                          const std::vector<BinarySample>& train, std::uint64_t seed) {
    check_keys(family, params);
    const HyperParams d = default_params(family);
    auto p = [&](const std::string& k) { return get_param(params, k, d.at(k)); };

    ScalerStats scaler = fit_scaler_on(train);
    if (scaler.mean.empty() && !train.empty()) {
        scaler.mean.assign(train.front().x.size(), 0.0);
        scaler.sd.assign(train.front().x.size(), 0.0);
    }
    std::vector<BinarySample> scaled = train;
    apply_scaler_inplace(scaler, scaled);

    switch (family) {
        case Family::logreg:
            return Classifier(family, std::move(scaler),
                              train_logreg(scaled, p("l2"), p("learning_rate"),
                                           static_cast<int>(p("epochs")), seed));
        case Family::random_forest: {
            RandomForestParams rp;
            rp.n_trees = static_cast<int>(p("n_trees"));
            rp.max_depth = static_cast<int>(p("max_depth"));
            rp.min_leaf = static_cast<int>(p("min_leaf"));
            rp.features_per_split = static_cast<int>(p("features_per_split"));
            rp.bootstrap = p("bootstrap") != 0.0;
            return Classifier(family, std::move(scaler), train_random_forest(scaled, rp, seed));
        }
        case Family::gbt: {
            GbtParams gp;
            gp.n_rounds = static_cast<int>(p("n_rounds"));
            gp.learning_rate = p("learning_rate");
            gp.max_depth = static_cast<int>(p("max_depth"));
            gp.lambda = p("lambda");
            gp.min_child_weight = p("min_child_weight");
            gp.min_leaf = static_cast<int>(p("min_leaf"));
            return Classifier(family, std::move(scaler), train_gbt(scaled, gp, seed));
        }
    }
    throw ConfigError("unknown model family");
}

EvaluationSplit make_evaluation_split(const std::vector<BinarySample>& samples, double fraction,
                                      std::uint64_t seed) {
    auto split = chronological_split(samples, fraction);
    return {oversample_minority(split.train, seed).samples, std::move(split.test)};
}

BinaryMetrics evaluate_classifier(const Classifier& c, const std::vector<BinarySample>& rows) {
    std::vector<double> probas;
    std::vector<int> labels;
    probas.reserve(rows.size());
    labels.reserve(rows.size());
    for (const auto& s : rows) {
        probas.push_back(c.predict_proba(s.x));
        labels.push_back(s.label);
    }
    return binary_metrics(probas, labels);
}

std::vector<BinarySample> project(const std::vector<BinarySample>& samples,
                                  const std::vector<std::size_t>& features) {
    std::vector<BinarySample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        BinarySample p{s.player_id, s.anchor_date, {}, s.label};
        p.x.reserve(features.size());
        for (auto f : features) p.x.push_back(s.x.at(f));
        out.push_back(std::move(p));
    }
    return out;
}

GridResult grid_search(Family family, const GridSpec& grid, const EvaluationSplit& split,
                       const ScorerWeights& weights, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("grid search needs at least one hyperparameter");
    for (const auto& [k, values] : grid)
        if (values.empty()) throw ConfigError("grid axis '" + k + "' has no candidates");

    std::vector<HyperParams> configs{{}};
    for (const auto& [k, values] : grid) {
        std::vector<HyperParams> next;
        for (const auto& c : configs)
            for (double v : values) {
                HyperParams e = c;
                e[k] = v;
                next.push_back(std::move(e));
            }
        configs = std::move(next);
    }

    GridResult res;
    const std::size_t nf = split.train.empty() ? 0 : split.train.front().x.size();
    for (const auto& cfg : configs) {
        const Classifier c = fit_classifier(family, cfg, split.train, seed);
        LeaderboardEntry e;
        e.config = cfg;
        e.metrics = evaluate_classifier(c, split.valid);
        e.score = weighted_score(e.metrics, weights);
        e.n_features = nf;
        res.leaderboard.push_back(std::move(e));
    }
    std::stable_sort(res.leaderboard.begin(), res.leaderboard.end(), ranks_before);
    res.best = res.leaderboard.front().config;
    return res;
}

std::string leaderboard_csv(const GridResult& result) {
    csv::Writer w({"rank", "config", "n_features", "f1", "precision", "recall", "auc", "score"});
    auto opt = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); };
    std::size_t rank = 1;
    for (const auto& e : result.leaderboard)
        w.row({std::to_string(rank++), config_string(e.config), std::to_string(e.n_features),
               opt(e.metrics.f1), opt(e.metrics.precision), opt(e.metrics.recall),
               opt(e.metrics.auc), csv::format_number(e.score)});
    return w.str();
}

SelectionResult greedy_forward_select(Family family, const HyperParams& params,
                                      const EvaluationSplit& split, const ScorerWeights& weights,
                                      std::uint64_t seed) {
    const std::size_t nf = split.train.empty() ? 0 : split.train.front().x.size();
    SelectionResult res;
    double current = score_subset(family, params, split, {}, weights, seed);
    res.score_path.push_back(current);
    std::vector<bool> used(nf, false);
    while (res.features.size() < nf) {
        double best = current;
        std::optional<std::size_t> best_f;
        for (std::size_t f = 0; f < nf; ++f) {
            if (used[f]) continue;
            auto trial = res.features;
            trial.push_back(f);
            const double s = score_subset(family, params, split, trial, weights, seed);
            if (s > best + 1e-12) {
                best = s;
                best_f = f;
            }
        }
        if (!best_f) break;
        used[*best_f] = true;
        res.features.push_back(*best_f);
        res.score_path.push_back(best);
        current = best;
    }
    return res;
}

EliminationResult rfe(Family family, const HyperParams& params, const EvaluationSplit& split,
                      const ScorerWeights& weights, std::uint64_t seed, int step) {
    if (step < 1) throw ConfigError("rfe step must be >= 1");
    const std::size_t nf = split.train.empty() ? 0 : split.train.front().x.size();
    std::vector<std::size_t> remaining(nf);
    std::iota(remaining.begin(), remaining.end(), 0);
    EliminationResult res;
    while (remaining.size() > 1) {
        const auto train = project(split.train, remaining);
        const Classifier c = fit_classifier(family, params, train, seed);
        res.score_path.push_back(weighted_score(evaluate_classifier(c, project(split.valid, remaining)), weights));
        const auto imp = c.importances();
        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return imp[a] < imp[b]; });
        const std::size_t drop = std::min<std::size_t>(static_cast<std::size_t>(step), remaining.size() - 1);
        std::vector<bool> gone(remaining.size(), false);
        for (std::size_t k = 0; k < drop; ++k) {
            gone[order[k]] = true;
            res.eliminated.push_back(remaining[order[k]]);
        }
        std::vector<std::size_t> next;
        for (std::size_t i = 0; i < remaining.size(); ++i)
            if (!gone[i]) next.push_back(remaining[i]);
        remaining = std::move(next);
    }
    if (!remaining.empty())
        res.score_path.push_back(score_subset(family, params, split, remaining, weights, seed));
    return res;
}

std::vector<WindowResult> window_sweep(Family family, const HyperParams& params,
                                       const FeaturePanel& panel,
                                       std::span<const InjuryEvent> injuries,
                                       const std::vector<int>& windows, double fraction,
                                       const ScorerWeights& weights, std::uint64_t seed) {
    std::vector<WindowResult> out;
    for (int lookback : windows) {
        for (int horizon : windows) {
            WindowResult r;
            r.lookback = lookback;
            r.horizon = horizon;
            try {
                const auto samples = build_binary_samples(panel, injuries, lookback, horizon);
                const auto split = make_evaluation_split(samples, fraction, seed);
                r.n_train = split.train.size();
                r.n_test = split.valid.size();
                const bool has_pos = std::any_of(split.train.begin(), split.train.end(),
                                                 [](const auto& s) { return s.label == 1; });
                const Classifier c = fit_classifier(family, params, split.train, seed);
                r.metrics = evaluate_classifier(c, split.valid);
                r.score = weighted_score(r.metrics, weights);
                r.flagged = !has_pos || !r.metrics.auc;
            } catch (const ConfigError&) {
                r.flagged = true;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::string window_sweep_csv(const std::vector<WindowResult>& rows) {
    csv::Writer w({"lookback", "horizon", "n_train", "n_test", "f1", "precision", "recall", "auc",
                   "score", "flagged"});
    auto opt = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); };
    for (const auto& r : rows)
        w.row({std::to_string(r.lookback), std::to_string(r.horizon), std::to_string(r.n_train),
               std::to_string(r.n_test), opt(r.metrics.f1), opt(r.metrics.precision),
               opt(r.metrics.recall), opt(r.metrics.auc), csv::format_number(r.score),
               r.flagged ? "1" : "0"});
    return w.str();
}

}  // namespace injurycast
