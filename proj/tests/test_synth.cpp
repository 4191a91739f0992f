#include <doctest.h>

#include <cmath>

#include "injurycast/errors.hpp"
#include "injurycast/ingest.hpp"
#include "injurycast/synth.hpp"
#include "support.hpp"

using namespace injurycast;

namespace {

double oracle_logistic(const HazardSpec& spec, const PlayerTrack& t, std::size_t day) {
    double z = std::log(spec.base_rate) - std::log(1 - spec.base_rate);
    for (std::size_t f = 0; f < spec.features.size(); ++f) {
        const auto& sf = spec.features[f];
        z += sf.weight * (t.value(day, f) - sf.mean) / sf.sd;
    }
    return 1 / (1 + std::exp(-z));
}

HazardSpec zero_weights(double base, std::uint64_t seed) {
    auto spec = default_hazard_spec();
    for (auto& f : spec.features) f.weight = 0;
    spec.base_rate = base;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("the default spec has three driving and ten noise features") {
    const auto spec = default_hazard_spec();
    CHECK(spec.features.size() == 13);
    int driving = 0;
    for (const auto& f : spec.features) driving += f.weight == 1.0;
    CHECK(driving == 3);
    CHECK_NOTHROW(validate(spec));
}

TEST_CASE("generation is deterministic per seed") {
    const auto spec = default_hazard_spec();
    const auto a = generate(5, 60, spec);
    const auto b = generate(5, 60, spec);
    CHECK(monitoring_csv(a.records) == monitoring_csv(b.records));
    CHECK(injuries_csv(a.injuries) == injuries_csv(b.injuries));
    CHECK(panel_csv(a.truth) == panel_csv(b.truth));
    auto other = spec;
    other.seed = 43;
    CHECK(panel_csv(generate(5, 60, other).truth) != panel_csv(a.truth));
}

TEST_CASE("zero missingness gives a complete mask") {
    auto spec = default_hazard_spec();
    spec.subjective_missing_rate = 0;
    spec.objective_missing_rate = 0;
    const auto c = generate(3, 40, spec);
    for (std::size_t f = 0; f < c.panel.n_features(); ++f) CHECK(c.panel.missing_fraction(f) == 0.0);
    CHECK(c.records.size() == 120);
}

TEST_CASE("empirical injury rate matches the base rate without weights") {
    double pooled = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto c = generate(30, 300, zero_weights(0.01, seed));
        const double rate = static_cast<double>(c.injuries.size()) / 9000.0;
        CHECK(std::abs(rate - 0.01) <= 0.3 * 0.01);
        pooled += rate / 5;
        CHECK(oracle_risk(zero_weights(0.01, seed), c.truth, "P03", c.truth.track(2).first_date() + 17) ==
              doctest::Approx(0.01).epsilon(1e-12));
    }
    CHECK(std::abs(pooled - 0.01) <= 0.1 * 0.01);
}

TEST_CASE("oracle risk follows the logistic hazard") {
    const auto spec = default_hazard_spec();
    const auto c = generate(4, 50, spec);
    for (std::size_t p = 0; p < 4; ++p) {
        const auto& t = c.truth.track(p);
        for (std::size_t d = 0; d < t.n_days(); d += 7) {
            const Date date = t.first_date() + static_cast<int>(d);
            CHECK(oracle_risk(spec, c.truth, t.player_id(), date) ==
                  doctest::Approx(oracle_logistic(spec, t, d)).epsilon(1e-12));
        }
        const Date anchor = t.first_date() + 10;
        double survive = 1;
        for (int k = 1; k <= 7; ++k) survive *= 1 - oracle_risk(spec, c.truth, t.player_id(), anchor + k);
        CHECK(oracle_horizon_risk(spec, c.truth, t.player_id(), anchor, 7) == doctest::Approx(1 - survive));
        const Date near_end = t.last_date() - 2;
        CHECK(oracle_horizon_risk(spec, c.truth, t.player_id(), near_end, 7) ==
              doctest::Approx(1 - (1 - oracle_risk(spec, c.truth, t.player_id(), near_end + 1)) *
                                      (1 - oracle_risk(spec, c.truth, t.player_id(), near_end + 2))));
    }

    FeaturePanel truth = c.truth;
    std::size_t driving = 0;
    while (spec.features[driving].weight <= 0) ++driving;
    double last = -1;
    for (double v = spec.features[driving].lo; v <= spec.features[driving].hi; v += 0.25) {
        truth.track(0).set(5, driving, v);
        const double r = oracle_risk(spec, truth, "P01", truth.track(0).first_date() + 5);
        CHECK(r > last);
        last = r;
    }
    CHECK_THROWS_AS(oracle_risk(spec, c.truth, "nobody", c.truth.track(0).first_date()), DataError);
}

TEST_CASE("generated data passes cleaning and survives a CSV round-trip") {
    const auto c = generate(30, 300, default_hazard_spec());
    CHECK(clean(c.records).report.rejected() == 0);
    for (const auto& r : c.records) CHECK(validate(r).empty());
    const auto back = parse_monitoring_text(monitoring_csv(c.records)).rows;
    REQUIRE(back.size() == c.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].player_id == c.records[i].player_id);
        CHECK(back[i].date == c.records[i].date);
        CHECK(back[i].fields == c.records[i].fields);
    }
    const auto inj = parse_injury_text(injuries_csv(c.injuries));
    REQUIRE(inj.size() == c.injuries.size());
    for (std::size_t i = 0; i < inj.size(); ++i) {
        CHECK(inj[i].player_id == c.injuries[i].player_id);
        CHECK(inj[i].date == c.injuries[i].date);
    }
}

TEST_CASE("invalid specs are configuration errors") {
    const auto spec = default_hazard_spec();
    CHECK_THROWS_AS(generate(1, 10, spec), ConfigError);
    auto bad = spec;
    bad.subjective_missing_rate = 1;
    bad.objective_missing_rate = 1;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = spec;
    bad.base_rate = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = spec;
    bad.features[0].sd = 0;
    bad.persistence = 1.0;
    try {
        validate(bad);
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(e.messages().size() == 2);
    }
}
