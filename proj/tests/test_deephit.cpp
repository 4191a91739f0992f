#include <doctest.h>

#include <cmath>
#include <random>

#include "injurycast/deephit.hpp"
#include "injurycast/errors.hpp"
#include "support.hpp"

using namespace injurycast;
using testsupport::day;

namespace {

DeepHitNet zero_net(int dim, int bins) {
    MlpConfig m;
    m.hidden_widths = {3};
    DeepHitNet net(dim, m, bins);
    net.set_parameters(std::vector<double>(net.parameter_count(), 0.0));
    return net;
}

/// Net whose head bias carries `logits` and whose weights are zero.
DeepHitNet logit_net(const std::vector<double>& logits) {
    auto net = zero_net(2, static_cast<int>(logits.size()) - 1);
    net.layers().back().bias = logits;
    return net;
}

std::vector<double> logits_for_pmf(const std::vector<double>& pmf) {
    std::vector<double> out;
    for (double p : pmf) out.push_back(std::log(p));
    return out;
}

SurvivalSample sample(int time, int event, std::vector<double> x = {0.0, 0.0}) {
    SurvivalSample s;
    s.player_id = "p";
    s.anchor_date = day(0);
    s.x = std::move(x);
    s.time_to_event = time;
    s.event = event;
    return s;
}

void check_curve(const RiskCurve& c) {
    double total = 0;
    for (double p : c.pmf) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-6);
    for (std::size_t k = 1; k < c.cif.size(); ++k) CHECK(c.cif[k] >= c.cif[k - 1]);
    CHECK(c.cif.back() <= 1.0 + 1e-12);
}

}  // namespace

TEST_CASE("forward pass shapes and limits") {
    const auto net = zero_net(4, 7);
    const auto c = net.forward(std::vector<double>{1, 2, 3, 4});
    REQUIRE(c.pmf.size() == 8);
    REQUIRE(c.cif.size() == 7);
    for (double p : c.pmf) CHECK(p == doctest::Approx(1.0 / 8));
    CHECK(risk_score(c) == doctest::Approx(7.0 / 8));
    CHECK_THROWS_AS(net.forward(std::vector<double>{1, 2}), std::invalid_argument);

    const auto big = risk_curve_from_logits(std::vector<double>{800, 0, 0, 0, 0, 0, 0, 0});
    CHECK(big.pmf[0] == doctest::Approx(1.0));
    const auto beyond = risk_curve_from_logits(std::vector<double>{-800, -800, -800, -800, -800, -800, -800, 0});
    CHECK(risk_score(beyond) == doctest::Approx(0.0));
    const auto within = risk_curve_from_logits(std::vector<double>{0, 0, 0, 0, 0, 0, 0, -800});
    CHECK(risk_score(within) == doctest::Approx(1.0));
}

TEST_CASE("random forward passes give valid curves") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        MlpConfig m;
        m.hidden_widths = {1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 5)};
        m.activation = trial % 2 ? Activation::relu : Activation::tanh;
        m.weight_init_scale = 0.5 + static_cast<double>(rng() % 40);
        m.seed = rng();
        DeepHitNet net(5, m, 1 + static_cast<int>(rng() % 9));
        std::vector<double> x(5);
        for (auto& v : x) v = n(rng);
        check_curve(net.forward(x));
    }
}

TEST_CASE("loss examples") {
    DeepHitConfig cfg;
    cfg.alpha = 1;
    cfg.beta = 0;
    const auto ev = logit_net(logits_for_pmf({0.1, 0.5, 0.1, 0.1, 0.1, 0.05, 0.025, 0.025}));
    const std::vector<SurvivalSample> one{sample(2, 1)};
    CHECK(loss(ev, one, cfg).total == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(loss(ev, one, cfg).total - 0.6931) < 1e-4);

    const auto cens = logit_net(logits_for_pmf({0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2}));
    const std::vector<SurvivalSample> c1{sample(1, 0)};
    CHECK(loss(cens, c1, cfg).total == doctest::Approx(-std::log(0.8)).epsilon(1e-12));
    CHECK(std::abs(loss(cens, c1, cfg).total - 0.2231) < 1e-4);

    cfg.alpha = 0;
    cfg.beta = 1;
    const std::vector<SurvivalSample> pair{sample(2, 1), sample(5, 0)};
    const auto v = loss(ev, pair, cfg);
    CHECK(v.pairs == 1);
    CHECK(v.rank == doctest::Approx(1.0));
    CHECK_THROWS(loss(ev, std::vector<SurvivalSample>{}, cfg));
}

TEST_CASE("ranking term on a hand-built pair") {
    DeepHitConfig cfg;
    cfg.alpha = 0;
    cfg.beta = 1;
    cfg.sigma = 0.5;
    cfg.bins = 2;
    MlpConfig m;
    m.hidden_widths = {1};
    DeepHitNet net(1, m, 2);
    auto p = std::vector<double>(net.parameter_count(), 0.0);
    net.set_parameters(p);
    // head: logits = w * h + b with h = tanh(x * w1); make logits depend on x
    net.layers()[0].weight = {1.0};
    net.layers()[1].weight = {2.0, 0.0, 0.0};
    const std::vector<SurvivalSample> batch{sample(1, 1, {1.0}), sample(2, 1, {-1.0})};
    const auto ci = net.forward(batch[0].x).cif[0];
    const auto cj = net.forward(batch[1].x).cif[0];
    CHECK(loss(net, batch, cfg).rank == doctest::Approx(std::exp(-(ci - cj) / 0.5)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        MlpConfig m;
        m.hidden_widths = {2 + static_cast<int>(rng() % 5)};
        if (trial % 3 == 0) m.hidden_widths.push_back(2 + static_cast<int>(rng() % 4));
        m.activation = trial % 2 ? Activation::tanh : Activation::relu;
        m.seed = rng();
        DeepHitConfig cfg;
        cfg.bins = 1 + static_cast<int>(rng() % 7);
        cfg.alpha = static_cast<double>(rng() % 3);
        cfg.beta = 0.1 + static_cast<double>(rng() % 3);
        cfg.sigma = 0.1 + static_cast<double>(rng() % 10) / 10.0;
        const int dim = 1 + static_cast<int>(rng() % 5);
        DeepHitNet net(dim, m, cfg.bins);
        testsupport::randomize_biases(net, rng);
        const auto batch = testsupport::random_survival_batch(rng, 3 + static_cast<int>(rng() % 10), dim, cfg.bins);
        INFO("trial " << trial << (m.activation == Activation::relu ? " relu" : " tanh"));
        CHECK(testsupport::deephit_fd_error(net, batch, cfg) < 1e-4);
    }
}

TEST_CASE("gradient linearity and batch-mean scaling") {
    std::mt19937_64 rng(4);
    MlpConfig m;
    m.hidden_widths = {4};
    DeepHitConfig cfg;
    DeepHitNet net(3, m, 7);
    const auto batch = testsupport::random_survival_batch(rng, 6, 3, 7);
    DeepHitConfig nll_only = cfg;
    nll_only.beta = 0;
    DeepHitConfig rank_only = cfg;
    rank_only.alpha = 0;
    const auto g = gradients(net, batch, cfg).flat();
    const auto a = gradients(net, batch, nll_only).flat();
    const auto b = gradients(net, batch, rank_only).flat();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-10));

    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const auto gd = gradients(net, doubled, nll_only).flat();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(gd[i] == doctest::Approx(a[i]).epsilon(1e-10));
}

TEST_CASE("loss is invariant to batch order") {
    std::mt19937_64 rng(12);
    MlpConfig m;
    DeepHitConfig cfg;
    DeepHitNet net(4, m, 7);
    auto batch = testsupport::random_survival_batch(rng, 20, 4, 7);
    const double before = loss(net, batch, cfg).total;
    std::shuffle(batch.begin(), batch.end(), rng);
    CHECK(loss(net, batch, cfg).total == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("a single bin reduces to binary cross-entropy") {
    DeepHitConfig cfg;
    cfg.bins = 1;
    cfg.beta = 0;
    const double z0 = 0.3, z1 = -0.4;
    const auto net = logit_net({z0, z1});
    const double p = 1.0 / (1.0 + std::exp(-(z0 - z1)));
    const std::vector<SurvivalSample> batch{sample(1, 1), sample(1, 0), sample(1, 0)};
    const double ce = -(std::log(p) + 2 * std::log(1 - p)) / 3;
    CHECK(loss(net, batch, cfg).total == doctest::Approx(ce).epsilon(1e-12));
}

namespace {

std::vector<SurvivalSample> separable(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> noise(0, 1);
    std::vector<SurvivalSample> out;
    for (int i = 0; i < n; ++i) {
        SurvivalSample s = sample(7, 0, {noise(rng), noise(rng), noise(rng)});
        s.anchor_date = day(i);
        if (s.x[0] > 0.5) {
            s.event = 1;
            s.time_to_event = 1 + static_cast<int>(rng() % 3);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("training decreases the loss and is deterministic") {
    std::mt19937_64 rng(1);
    const auto data = separable(rng, 400);
    MlpConfig m;
    DeepHitConfig cfg;
    cfg.epochs = 10;
    cfg.patience = 100;
    cfg.validation_fraction = 0;
    cfg.weight_decay = 0;
    const auto a = train(data, m, cfg);
    REQUIRE(a.history.train_loss.size() == 10);
    for (std::size_t e = 1; e < 10; ++e) CHECK(a.history.train_loss[e] < a.history.train_loss[e - 1]);
    const auto b = train(data, m, cfg);
    CHECK(a.history.train_loss == b.history.train_loss);
    CHECK(a.net.parameters() == b.net.parameters());

    cfg.learning_rate = 0;
    const DeepHitNet fresh(3, m, cfg.bins);
    CHECK(train(data, m, cfg).net.parameters() == fresh.parameters());

    auto no_events = data;
    for (auto& s : no_events) s.event = 0;
    CHECK_THROWS_AS(train(no_events, m, cfg), TrainingError);
}

TEST_CASE("configuration validation") {
    MlpConfig m;
    m.hidden_widths = {};
    CHECK_THROWS_AS(validate(m), ConfigError);
    m.hidden_widths = {0};
    CHECK_THROWS_AS(validate(m), ConfigError);
    DeepHitConfig cfg;
    cfg.alpha = 0;
    cfg.beta = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.sigma = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.weight_decay = -1;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}

namespace {

DeepHitModel small_model(const FeaturePanel& panel) {
    MlpConfig m;
    m.hidden_widths = {3};
    DeepHitModel model;
    model.net = DeepHitNet(static_cast<int>(panel.n_features()), m, 7);
    model.scaler.mean.assign(panel.n_features(), 1.5);
    model.scaler.sd.assign(panel.n_features(), 2.0);
    model.feature_names = panel.feature_names();
    model.lookback = 5;
    return model;
}

}  // namespace

TEST_CASE("daily risk series") {
    FeaturePanel panel({"a", "b"});
    auto& t = panel.add_player("p", day(0), 12);
    for (std::size_t d = 0; d < 12; ++d) {
        t.set(d, 0, 3.0);
        t.set(d, 1, -1.0);
    }
    const auto model = small_model(panel);
    const auto series = daily_risk_series(model, panel, "p");
    REQUIRE(series.size() == 8);
    CHECK(series.front().date == day(4));
    for (const auto& r : series) CHECK(r.curve.pmf == series.front().curve.pmf);
}

TEST_CASE("checkpoints round-trip and reject a different feature order") {
    FeaturePanel panel({"a", "b", "c"});
    auto model = small_model(panel);
    model.config.weight_decay = 0.25;
    model.config.seed = 99;
    const auto back = parse_checkpoint(checkpoint_text(model));
    CHECK(back.net.parameters() == model.net.parameters());
    CHECK(back.scaler.mean == model.scaler.mean);
    CHECK(back.scaler.sd == model.scaler.sd);
    CHECK(back.feature_names == model.feature_names);
    CHECK(back.lookback == 5);
    CHECK(back.config.weight_decay == 0.25);
    CHECK(back.config.seed == 99);
    CHECK(checkpoint_text(back) == checkpoint_text(model));

    const auto dir = testsupport::temp_dir("ckpt");
    save_checkpoint(model, dir / "model.txt");
    CHECK_NOTHROW(load_checkpoint(dir / "model.txt", {"a", "b", "c"}));
    CHECK_THROWS_AS(load_checkpoint(dir / "model.txt", {"b", "a", "c"}), DataError);
    std::filesystem::remove_all(dir);
}
