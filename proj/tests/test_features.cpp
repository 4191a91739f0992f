#include <doctest.h>

#include <cmath>
#include <numeric>
#include <map>
#include <random>

#include "injurycast/features.hpp"
#include "support.hpp"

using namespace injurycast;
using testsupport::day;

namespace {

LoadSeries series(const std::vector<std::optional<double>>& loads, int start = 0) {
    return LoadSeries(day(start), loads);
}

std::vector<std::optional<double>> week(std::vector<double> v) {
    return {v.begin(), v.end()};
}

double oracle_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double oracle_sample_sd(const std::vector<double>& v) {
    const double m = oracle_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PlayerDay session(const std::string& id, int d, std::optional<double> srpe) {
    PlayerDay p;
    p.player_id = id;
    p.date = day(d);
    p[Field::srpe] = srpe;
    return p;
}

}  // namespace

TEST_CASE("daily load sums present srpe") {
    const std::vector<PlayerDay> two{session("a", 0, 300.0), session("a", 0, 200.0)};
    CHECK(*daily_load(two) == 500.0);
    PlayerDay one = session("a", 0, 420.0);
    one[Field::rpe] = 7;
    one[Field::duration_subj] = 60;
    CHECK(*daily_load(std::span(&one, 1)) == 420.0);
    const std::vector<PlayerDay> none{session("a", 0, std::nullopt)};
    CHECK_FALSE(daily_load(none).has_value());
}

TEST_CASE("acute load and weekly load") {
    const std::vector<double> loads{100, 100, 100, 100, 100, 100, 200};
    const auto s = series(week(loads));
    CHECK(*atl(s, day(6)) == doctest::Approx(oracle_mean(loads)).epsilon(1e-12));
    CHECK(*atl(s, day(6)) == doctest::Approx(114.2857142857).epsilon(1e-9));
    CHECK(*weekly_load(s, day(6)) == 800.0);
    CHECK(*atl(series(week({100, 100, 100, 100, 100, 100, 100})), day(6)) == 100.0);

    const auto sparse = series({100.0, std::nullopt, 100.0, std::nullopt, 100.0, std::nullopt, std::nullopt});
    CHECK(*atl(sparse, day(6)) == doctest::Approx(300.0 / 7.0).epsilon(1e-12));
    CHECK(*atl(sparse, day(6)) == doctest::Approx(42.857142857).epsilon(1e-9));
    CHECK_FALSE(atl(series({std::nullopt, 100.0}), day(0)).has_value());
    CHECK(*weekly_load(series({0.0, 0.0, 0.0}), day(2)) == 0.0);
}

TEST_CASE("monotony and strain") {
    const std::vector<double> loads{100, 100, 100, 100, 100, 100, 200};
    const auto s = series(week(loads));
    const double m = oracle_mean(loads) / oracle_sample_sd(loads);
    CHECK(oracle_sample_sd(loads) == doctest::Approx(37.7964).epsilon(1e-5));
    CHECK(*monotony(s, day(6)) == doctest::Approx(m).epsilon(1e-12));
    CHECK(std::abs(*monotony(s, day(6)) - 3.0237) < 1e-4);
    CHECK(*strain(s, day(6)) == doctest::Approx(800.0 * m).epsilon(1e-12));
    CHECK(std::abs(*strain(s, day(6)) - 2418.97) < 0.01);

    const std::vector<double> alt{0, 200, 0, 200, 0, 200, 0};
    const auto a = series({std::nullopt, 200.0, 0.0, 200.0, 0.0, 200.0, 0.0}, -1);
    const auto b = series(week(alt));
    CHECK(*monotony(b, day(6)) == doctest::Approx(oracle_mean(alt) / oracle_sample_sd(alt)).epsilon(1e-12));
    CHECK(std::abs(*monotony(b, day(6)) - 0.80178) < 1e-5);
    CHECK_FALSE(monotony(a, day(5)).has_value());

    CHECK_FALSE(monotony(series(week({50, 50, 50, 50, 50, 50, 50})), day(6)).has_value());
    CHECK_FALSE(strain(series(week({50, 50, 50, 50, 50, 50, 50})), day(6)).has_value());
    CHECK_FALSE(strain(series(week({0, 0, 0, 0, 0, 0, 0})), day(6)).has_value());
    CHECK_FALSE(monotony(series(week({100, 200, 100})), day(2)).has_value());
}

TEST_CASE("chronic load and the acute-chronic ratio") {
    std::vector<std::optional<double>> constant(42, 100.0);
    const auto s = series(constant);
    CHECK(*ctl(s, day(41), 28) == 2800.0);
    CHECK(*ctl(s, day(41), 42) == 4200.0);
    CHECK(*acwr(s, day(41)) == doctest::Approx(1.0));
    CHECK_THROWS(ctl(s, day(41), 7));

    std::vector<std::optional<double>> mixed(28, std::nullopt);
    for (int i = 0; i < 14; ++i) mixed[static_cast<std::size_t>(i)] = 100.0;
    CHECK(*ctl(series(mixed), day(27), 28) == 1400.0);

    std::vector<std::optional<double>> r2(28, 0.0);
    for (int i = 21; i < 28; ++i) r2[static_cast<std::size_t>(i)] = 500.0;
    for (int i = 0; i < 21; ++i) r2[static_cast<std::size_t>(i)] = (400.0 * 28 - 3500.0) / 21.0;
    CHECK(*acwr(series(r2), day(27)) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK_FALSE(acwr(series(std::vector<std::optional<double>>(28, 0.0)), day(27)).has_value());
}

TEST_CASE("injury history counts strictly earlier injuries") {
    const std::vector<InjuryEvent> inj{{"a", day(10), InjuryType::acute, "knee"},
                                       {"a", day(50), InjuryType::overuse, "hip"},
                                       {"b", day(5), InjuryType::acute, "ankle"}};
    CHECK(past_injury_count(inj, "a", day(60)) == 2);
    CHECK(past_injury_count(inj, "a", day(10)) == 0);
    CHECK(past_injury_count(inj, "c", day(60)) == 0);
}

TEST_CASE("questionnaire missingness over the trailing week") {
    std::vector<std::string> names;
    for (Field f : kWellnessFields) names.emplace_back(field_name(f));
    FeaturePanel panel(names);
    auto& t = panel.add_player("a", day(0), 7);
    for (std::size_t d = 0; d < 7; ++d)
        if (d != 1 && d != 3 && d != 5)
            for (std::size_t f = 0; f < names.size(); ++f) t.set(d, f, 3.0);
    CHECK(*subjective_missingness_7d(panel, 0, day(6)) == doctest::Approx(3.0 / 7.0));
    t.set(1, 0, 2.0);
    CHECK(*subjective_missingness_7d(panel, 0, day(6)) == doctest::Approx(2.0 / 7.0));
    t.set(3, 2, 2.0);
    t.set(5, 5, 2.0);
    CHECK(*subjective_missingness_7d(panel, 0, day(6)) == 0.0);
}

TEST_CASE("rolling means") {
    FeaturePanel panel({"x"});
    auto& t = panel.add_player("a", day(0), 4);
    t.set(0, 0, 1);
    t.set(1, 0, 2);
    t.set(2, 0, 3);
    const auto r3 = rolling_means(panel, 3);
    CHECK(*r3.track(0).get(2, 0) == doctest::Approx(2.0));
    CHECK(*r3.track(0).get(3, 0) == doctest::Approx(2.5));
    const auto r1 = rolling_means(panel, 1);
    for (std::size_t d = 0; d < 4; ++d) CHECK(r1.track(0).get(d, 0) == panel.track(0).get(d, 0));

    std::mt19937_64 rng(8);
    const auto random = testsupport::random_panel(rng, 3, 2, 0.3);
    const auto r5 = rolling_means(random, 5);
    for (std::size_t p = 0; p < random.n_players(); ++p) {
        const auto& src = random.track(p);
        for (std::size_t d = 0; d < src.n_days(); ++d)
            for (std::size_t f = 0; f < 2; ++f) {
                double acc = 0;
                int n = 0;
                for (std::size_t k = d >= 4 ? d - 4 : 0; k <= d; ++k)
                    if (auto v = src.get(k, f)) acc += *v, ++n;
                if (n == 0) CHECK_FALSE(r5.track(p).observed(d, f));
                else CHECK(*r5.track(p).get(d, f) == doctest::Approx(acc / n).epsilon(1e-12));
            }
    }
}

namespace {

std::vector<PlayerDay> random_records(std::mt19937_64& rng, int shift, double scale) {
    std::vector<PlayerDay> out;
    std::uniform_real_distribution<double> load(50, 600);
    std::bernoulli_distribution session_day(0.7), wellness(0.8);
    for (const std::string id : {"a", "b", "c"}) {
        for (int d = 0; d < 80; ++d) {
            if (!session_day(rng)) continue;
            PlayerDay p = session(id, d + shift, scale * load(rng));
            if (wellness(rng)) p[Field::fatigue] = 3.0;
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("derived features shift with the calendar and respond to load scaling") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 r1(seed), r2(seed), r3(seed);
        const auto base = random_records(r1, 0, 1.0);
        const auto shifted = random_records(r2, 37, 1.0);
        const auto scaled = random_records(r3, 0, 2.5);
        const std::vector<InjuryEvent> inj0{{"a", day(30), InjuryType::acute, "knee"}};
        const std::vector<InjuryEvent> inj37{{"a", day(67), InjuryType::acute, "knee"}};
        const auto p0 = build_feature_panel(base, inj0);
        const auto p1 = build_feature_panel(shifted, inj37);
        const auto p2 = build_feature_panel(scaled, inj0);
        REQUIRE(p0.n_players() == p1.n_players());
        const std::map<std::string, double> power{{"daily_load", 1}, {"atl", 1},      {"weekly_load", 1},
                                                  {"monotony", 0},   {"strain", 1},   {"acwr", 0},
                                                  {"ctl28", 1},      {"ctl42", 1},    {"srpe", 1}};
        for (std::size_t p = 0; p < p0.n_players(); ++p) {
            const auto& a = p0.track(p);
            const auto& b = p1.track(p);
            const auto& c = p2.track(p);
            REQUIRE(b.first_date() == a.first_date() + 37);
            REQUIRE(a.n_days() == b.n_days());
            for (std::size_t d = 0; d < a.n_days(); ++d)
                for (std::size_t f = 0; f < p0.n_features(); ++f) {
                    CHECK(a.observed(d, f) == b.observed(d, f));
                    if (a.observed(d, f)) {
                        CHECK(std::isfinite(a.value(d, f)));
                        CHECK(a.value(d, f) == b.value(d, f));
                    }
                    const auto it = power.find(p0.feature_names()[f]);
                    if (it == power.end()) continue;
                    CHECK(a.observed(d, f) == c.observed(d, f));
                    if (!a.observed(d, f)) continue;
                    const double factor = std::pow(2.5, it->second);
                    CHECK(c.value(d, f) == doctest::Approx(factor * a.value(d, f)).epsilon(1e-9));
                }
        }
    }
}
