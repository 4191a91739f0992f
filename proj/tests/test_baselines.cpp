#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "injurycast/baselines.hpp"
#include "injurycast/errors.hpp"
#include "support.hpp"

using namespace injurycast;
using testsupport::day;

namespace {

/// Feature 0 drives the label through a logistic link; the rest are noise.
std::vector<BinarySample> informative(std::mt19937_64& rng, int n, int noise_features, double strength = 3.0) {
    std::normal_distribution<double> normal(0, 1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<BinarySample> out;
    for (int i = 0; i < n; ++i) {
        BinarySample s;
        s.player_id = "p" + std::to_string(i % 7);
        s.anchor_date = day(i);
        for (int f = 0; f <= noise_features; ++f) s.x.push_back(normal(rng));
        s.label = u(rng) < 1.0 / (1.0 + std::exp(-(strength * s.x[0] - 1.5))) ? 1 : 0;
        out.push_back(s);
    }
    return out;
}

double gini_impurity(double pos, double n) {
    if (n == 0) return 0;
    const double p = pos / n;
    return 2 * p * (1 - p) * n;
}

}  // namespace

TEST_CASE("weighted score") {
    BinaryMetrics m;
    m.f1 = 0.5;
    m.recall = 0.4;
    m.precision = 1.0;
    m.auc = 0.8;
    CHECK(weighted_score(m) == doctest::Approx(0.4 * 0.5 + 0.3 * 0.4 + 0.15 * 1.0 + 0.15 * 0.8));
    CHECK(weighted_score(m) == doctest::Approx(0.59));
    CHECK(weighted_score(m, {1, 0, 0, 0}) == 0.5);
    BinaryMetrics ones;
    ones.f1 = ones.recall = ones.precision = ones.auc = 1.0;
    CHECK(weighted_score(ones) == doctest::Approx(1.0));
    CHECK_THROWS_AS(validate(ScorerWeights{0.5, 0.5, 0.5, 0}), ConfigError);
    CHECK_THROWS_AS(validate(ScorerWeights{1.2, -0.2, 0, 0}), ConfigError);
}

TEST_CASE("logistic regression") {
    LogisticRegression zero;
    zero.weights = {0, 0};
    CHECK(zero.predict_proba(std::vector<double>{3, -4}) == 0.5);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rows = informative(rng, 30, 3);
        LogisticRegression m;
        for (int f = 0; f < 4; ++f) m.weights.push_back(n(rng));
        m.bias = n(rng);
        CHECK(testsupport::logreg_fd_error(m, rows, 0.01 * trial) < 1e-6);
    }

    const std::vector<BinarySample> two{{"a", day(0), {-1.0}, 0}, {"a", day(1), {1.0}, 1}};
    const auto fit = train_logreg(two, 0.0, 1.0, 500, 0);
    CHECK(fit.predict_proba(two[0].x) < 0.5);
    CHECK(fit.predict_proba(two[1].x) > 0.5);
    const auto shrunk = train_logreg(informative(rng, 100, 2), 1e9, 0.5, 100, 0);
    for (double w : shrunk.weights) CHECK(std::abs(w) < 1e-6);

    const auto rows = informative(rng, 200, 2);
    CHECK(train_logreg(rows, 0.01, 0.5, 50, 1).weights == train_logreg(rows, 0.01, 0.5, 50, 2).weights);
}

TEST_CASE("a depth-one tree recovers the brute-force best Gini split") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 10);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::vector<double>> x;
        std::vector<double> y, ones;
        const double cut = u(rng);
        for (int i = 0; i < 40; ++i) {
            const double v = std::round(u(rng) * 10) / 10;
            x.push_back({v});
            y.push_back((v > cut) != (rng() % 8 == 0) ? 1.0 : 0.0);
            ones.push_back(1.0);
        }
        std::vector<std::size_t> rows(x.size());
        std::iota(rows.begin(), rows.end(), 0);
        std::vector<double> imp(1, 0.0);
        TreeParams tp;
        tp.max_depth = 1;
        std::mt19937_64 tree_rng(1);
        const auto tree = grow_tree(x, y, ones, rows, SplitCriterion::gini, tp, tree_rng, imp);

        double best = gini_impurity(std::accumulate(y.begin(), y.end(), 0.0), 40.0);
        std::optional<double> best_t;
        for (const auto& c : x) {
            double lp = 0, ln = 0, rp = 0, rn = 0;
            for (std::size_t i = 0; i < x.size(); ++i)
                (x[i][0] <= c[0] ? (lp += y[i], ln += 1) : (rp += y[i], rn += 1));
            if (ln == 0 || rn == 0) continue;
            const double g = gini_impurity(lp, ln) + gini_impurity(rp, rn);
            if (g < best - 1e-12) best = g, best_t = c[0];
        }
        if (!best_t) {
            CHECK(tree.nodes().size() == 1);
            continue;
        }
        REQUIRE(tree.nodes().size() == 3);
        const auto& root = tree.nodes()[0];
        double lp = 0, ln = 0, rp = 0, rn = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            (x[i][0] <= root.threshold ? (lp += y[i], ln += 1) : (rp += y[i], rn += 1));
        CHECK(gini_impurity(lp, ln) + gini_impurity(rp, rn) == doctest::Approx(best).epsilon(1e-12));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(tree.predict(x[i]) == doctest::Approx(x[i][0] <= root.threshold ? lp / ln : rp / rn));
    }
}

TEST_CASE("random forest reductions and determinism") {
    std::mt19937_64 rng(5);
    const auto rows = informative(rng, 150, 3);
    RandomForestParams p;
    p.n_trees = 1;
    p.bootstrap = false;
    p.features_per_split = 4;
    p.max_depth = 4;
    p.min_leaf = 3;
    const auto rf = train_random_forest(rows, p, 9);

    std::vector<std::vector<double>> x;
    std::vector<double> y, ones;
    for (const auto& s : rows) x.push_back(s.x), y.push_back(s.label), ones.push_back(1.0);
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> imp(4, 0.0);
    TreeParams tp;
    tp.max_depth = 4;
    tp.min_leaf = 3;
    std::mt19937_64 tree_rng(123);
    const auto cart = grow_tree(x, y, ones, idx, SplitCriterion::gini, tp, tree_rng, imp);
    for (const auto& s : rows) CHECK(rf.predict_proba(s.x) == cart.predict(s.x));

    RandomForestParams full;
    full.n_trees = 20;
    const auto a = train_random_forest(rows, full, 4);
    const auto b = train_random_forest(rows, full, 4);
    for (const auto& s : rows) CHECK(a.predict_proba(s.x) == b.predict_proba(s.x));
    CHECK(a.importance == b.importance);
    CHECK(std::accumulate(a.importance.begin(), a.importance.end(), 0.0) == doctest::Approx(1.0));
    CHECK(std::max_element(a.importance.begin(), a.importance.end()) == a.importance.begin());
}

TEST_CASE("forest predictions stabilise as trees are added") {
    std::mt19937_64 rng(6);
    const auto rows = informative(rng, 80, 2);
    std::vector<double> spread;
    for (int n : {1, 10, 100}) {
        RandomForestParams p;
        p.n_trees = n;
        double total = 0;
        for (std::size_t probe = 0; probe < 10; ++probe) {
            std::vector<double> preds;
            for (std::uint64_t seed = 0; seed < 12; ++seed)
                preds.push_back(train_random_forest(rows, p, seed * 7919 + 1).predict_proba(rows[probe].x));
            const double m = std::accumulate(preds.begin(), preds.end(), 0.0) / static_cast<double>(preds.size());
            for (double v : preds) total += (v - m) * (v - m);
        }
        spread.push_back(total);
    }
    CHECK(spread[1] < spread[0]);
    CHECK(spread[2] < spread[1]);
}

TEST_CASE("gradient boosting") {
    std::mt19937_64 rng(8);
    const auto rows = informative(rng, 200, 2);
    const double rate = std::accumulate(rows.begin(), rows.end(), 0.0,
                                        [](double a, const BinarySample& s) { return a + s.label; }) /
                        static_cast<double>(rows.size());
    GbtParams none;
    none.n_rounds = 0;
    const auto g0 = train_gbt(rows, none, 1);
    CHECK(g0.base_margin == doctest::Approx(std::log(rate / (1 - rate))));
    CHECK(g0.predict_proba(rows[0].x) == doctest::Approx(rate));

    GbtParams frozen;
    frozen.learning_rate = 0;
    frozen.n_rounds = 10;
    const auto gz = train_gbt(rows, frozen, 1);
    for (const auto& s : rows) CHECK(gz.predict_proba(s.x) == doctest::Approx(rate));

    GbtParams stump;
    stump.n_rounds = 1;
    stump.max_depth = 1;
    const auto g1 = train_gbt(rows, stump, 1);
    CHECK(g1.loss_path[1] < g1.loss_path[0]);

    const auto g = train_gbt(rows, GbtParams{}, 1);
    REQUIRE(g.loss_path.size() == 101);
    for (std::size_t r = 1; r < g.loss_path.size(); ++r) CHECK(g.loss_path[r] <= g.loss_path[r - 1] + 1e-12);
}

TEST_CASE("hyperparameter keys are checked") {
    std::mt19937_64 rng(1);
    const auto rows = informative(rng, 40, 1);
    CHECK_THROWS_AS(fit_classifier(Family::logreg, {{"n_trees", 4}}, rows, 1), ConfigError);
    CHECK_NOTHROW(fit_classifier(Family::gbt, {{"n_rounds", 3}}, rows, 1));
}

TEST_CASE("grid search") {
    std::mt19937_64 rng(11);
    const auto split = make_evaluation_split(informative(rng, 300, 2), 0.7, 3);
    const auto single = grid_search(Family::logreg, {{"l2", {0.05}}}, split, {}, 1);
    CHECK(single.best.at("l2") == 0.05);
    CHECK(single.leaderboard.size() == 1);

    const GridSpec grid{{"n_rounds", {5, 20}}, {"max_depth", {1, 2, 3}}};
    const auto r = grid_search(Family::gbt, grid, split, {}, 1);
    CHECK(r.leaderboard.size() == 6);
    const GridSpec reversed{{"n_rounds", {20, 5}}, {"max_depth", {3, 2, 1}}};
    const auto r2 = grid_search(Family::gbt, reversed, split, {}, 1);
    CHECK(r2.best == r.best);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(r2.leaderboard[i].config == r.leaderboard[i].config);
        CHECK(r2.leaderboard[i].score == r.leaderboard[i].score);
    }
    for (std::size_t i = 1; i < 6; ++i) CHECK(r.leaderboard[i - 1].score >= r.leaderboard[i].score);

    const auto dup = grid_search(Family::logreg, {{"l2", {0.1, 0.1}}}, split, {}, 1);
    CHECK(dup.leaderboard[0].score == dup.leaderboard[1].score);
}

TEST_CASE("feature selection finds the informative feature") {
    std::mt19937_64 rng(12);
    const auto split = make_evaluation_split(informative(rng, 600, 4, 4.0), 0.7, 3);
    const auto g = greedy_forward_select(Family::logreg, {}, split, {}, 1);
    REQUIRE_FALSE(g.features.empty());
    CHECK(g.features[0] == 0);
    CHECK(g.score_path.size() == g.features.size() + 1);
    for (std::size_t i = 1; i < g.score_path.size(); ++i) CHECK(g.score_path[i] > g.score_path[i - 1]);
    const auto g2 = greedy_forward_select(Family::logreg, {}, split, {}, 1);
    CHECK(g2.features == g.features);

    const auto e = rfe(Family::logreg, {}, split, {}, 1);
    CHECK(e.eliminated.size() == 4);
    CHECK(std::find(e.eliminated.begin(), e.eliminated.end(), 0) == e.eliminated.end());

    const auto one = make_evaluation_split(project(informative(rng, 200, 0), {0}), 0.7, 3);
    CHECK(rfe(Family::logreg, {}, one, {}, 1).eliminated.empty());
}

TEST_CASE("greedy selection stops at the empty set when nothing helps") {
    std::vector<BinarySample> rows;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    for (int i = 0; i < 200; ++i) rows.push_back({"a", day(i), {n(rng), n(rng)}, 0});
    for (int i = 0; i < 140; i += 7) rows[static_cast<std::size_t>(i)].label = 1;
    const auto split = make_evaluation_split(rows, 0.7, 1);
    const auto g = greedy_forward_select(Family::logreg, {}, split, {1, 0, 0, 0}, 1);
    CHECK(g.features.empty());
}

TEST_CASE("window sweep") {
    std::mt19937_64 rng(19);
    FeaturePanel panel({"load", "noise"});
    std::vector<InjuryEvent> inj;
    std::normal_distribution<double> n(0, 1);
    for (int p = 0; p < 6; ++p) {
        auto& t = panel.add_player("p" + std::to_string(p), day(0), 120);
        for (std::size_t d = 0; d < 120; ++d) {
            t.set(d, 0, n(rng));
            t.set(d, 1, n(rng));
        }
        for (int d = 10 + p; d < 120; d += 17) inj.push_back({t.player_id(), day(d), InjuryType::acute, "knee"});
    }
    const std::vector<int> windows{1, 3, 7};
    const auto table = window_sweep(Family::logreg, {}, panel, inj, windows, 0.8, {}, 4);
    REQUIRE(table.size() == 9);
    const auto& row = table[3];
    CHECK(row.lookback == 3);
    CHECK(row.horizon == 1);
    const auto samples = build_binary_samples(panel, inj, 3, 1);
    const auto split = make_evaluation_split(samples, 0.8, 4);
    const auto c = fit_classifier(Family::logreg, {}, split.train, 4);
    const auto m = evaluate_classifier(c, split.valid);
    CHECK(row.metrics.f1 == m.f1);
    CHECK(row.metrics.auc == m.auc);
    CHECK(row.n_train == split.train.size());

    const auto none = window_sweep(Family::logreg, {}, panel, {}, {3}, 0.8, {}, 4);
    REQUIRE(none.size() == 1);
    CHECK(none[0].flagged);
}
