#include "injurycast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "injurycast/errors.hpp"

namespace injurycast {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double daily_hazard(const HazardSpec& spec, const PlayerTrack& truth, std::size_t day) {
    double logit = std::log(spec.base_rate / (1.0 - spec.base_rate));
    for (std::size_t f = 0; f < spec.features.size(); ++f) {
        const auto& sf = spec.features[f];
        if (sf.weight == 0.0) continue;
        logit += sf.weight * (truth.value(day, f) - sf.mean) / sf.sd;
    }
    return logistic(logit);
}

bool subjective_group(Field f) { return !is_objective(f); }

std::vector<std::string> names_of(const HazardSpec& spec) {
    std::vector<std::string> names;
    for (const auto& sf : spec.features) names.emplace_back(field_name(sf.field));
    return names;
}

}  // namespace

HazardSpec default_hazard_spec() {
    HazardSpec s;
    s.features = {
        {Field::stress, 3.0, 0.7, 1.0, 5.0, 1.0},
        {Field::soreness, 3.0, 0.7, 1.0, 5.0, 1.0},
        {Field::sp_hir_d, 400.0, 150.0, 0.0, 2000.0, 1.0},
        {Field::fatigue, 3.0, 0.7, 1.0, 5.0, 0.0},
        {Field::mood, 3.0, 0.7, 1.0, 5.0, 0.0},
        {Field::readiness, 6.0, 1.5, 0.0, 10.0, 0.0},
        {Field::sleep_duration, 7.5, 0.8, 3.0, 12.0, 0.0},
        {Field::rpe, 5.0, 1.5, 0.0, 10.0, 0.0},
        {Field::duration_subj, 75.0, 20.0, 10.0, 180.0, 0.0},
        {Field::duration_obj, 75.0, 20.0, 10.0, 180.0, 0.0},
        {Field::speed_km_h_mean, 6.0, 1.0, 2.0, 12.0, 0.0},
        {Field::speed_km_h_max, 26.0, 2.5, 15.0, 32.0, 0.0},
        {Field::distance, 6.5, 1.8, 0.5, 15.5, 0.0},
    };
    return s;
}

void validate(const HazardSpec& spec) {
    std::vector<std::string> errs;
    if (!(spec.base_rate > 0.0 && spec.base_rate < 1.0)) errs.emplace_back("base_rate must lie in (0, 1)");
    if (spec.features.empty()) errs.emplace_back("hazard spec has no features");
    std::set<Field> seen;
    for (const auto& f : spec.features) {
        if (!seen.insert(f.field).second)
            errs.push_back("duplicate synthetic feature " + std::string(field_name(f.field)));
        if (!(f.sd > 0.0)) errs.push_back("sd of " + std::string(field_name(f.field)) + " must be > 0");
        if (!(f.lo <= f.hi)) errs.push_back("clamp range of " + std::string(field_name(f.field)) + " is empty");
    }
    if (!(spec.noise_sd >= 0.0)) errs.emplace_back("noise_sd must be >= 0");
    if (!(spec.persistence >= 0.0 && spec.persistence < 1.0)) errs.emplace_back("persistence must lie in [0, 1)");
    if (!(spec.player_offset_share >= 0.0 && spec.player_offset_share <= 1.0))
        errs.emplace_back("player_offset_share must lie in [0, 1]");
    for (double r : {spec.subjective_missing_rate, spec.objective_missing_rate})
        if (!(r >= 0.0 && r <= 1.0)) errs.emplace_back("missing rates must lie in [0, 1]");
    if (spec.subjective_missing_rate >= 1.0 && spec.objective_missing_rate >= 1.0)
        errs.emplace_back("every value would be missing");
    if (!errs.empty()) throw ConfigError(errs);
}

SynthCohort generate(int n_players, int n_days, const HazardSpec& spec, Date start) {
    std::vector<std::string> errs;
    if (n_players < 2) errs.emplace_back("need at least two players");
    if (n_days < 1) errs.emplace_back("need at least one day");
    try {
        validate(spec);
    } catch (const ConfigError& e) {
        errs.insert(errs.end(), e.messages().begin(), e.messages().end());
    }
    if (!errs.empty()) throw ConfigError(errs);

    const std::size_t nf = spec.features.size();
    SynthCohort out{FeaturePanel(names_of(spec)), FeaturePanel(names_of(spec)), {}, {}};
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    static const char* kBodyParts[] = {"thigh", "knee", "ankle", "hip/groin", "lower leg", "foot"};

    const double offset_sd = std::sqrt(spec.player_offset_share);
    const double ar_sd = std::sqrt(1.0 - spec.player_offset_share);
    const double innovation_sd = ar_sd * std::sqrt(1.0 - spec.persistence * spec.persistence);

    for (int p = 0; p < n_players; ++p) {
        char id[16];
        std::snprintf(id, sizeof id, "P%02d", p + 1);
        auto& truth = out.truth.add_player(id, start, static_cast<std::size_t>(n_days));
        auto& seen = out.panel.add_player(id, start, static_cast<std::size_t>(n_days));

        std::vector<double> offset(nf), latent(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            offset[f] = offset_sd * normal(rng);
            latent[f] = ar_sd * normal(rng);
        }
        for (int d = 0; d < n_days; ++d) {
            const auto day = static_cast<std::size_t>(d);
            for (std::size_t f = 0; f < nf; ++f) {
                if (d > 0) latent[f] = spec.persistence * latent[f] + innovation_sd * normal(rng);
                const auto& sf = spec.features[f];
                truth.set(day, f, std::clamp(sf.mean + sf.sd * (offset[f] + latent[f]), sf.lo, sf.hi));
            }
            const double hazard = daily_hazard(spec, truth, day);
            if (unif(rng) < hazard) {
                InjuryEvent ev;
                ev.player_id = id;
                ev.date = start + d;
                ev.type = unif(rng) < 0.55 ? InjuryType::acute : InjuryType::overuse;
                ev.body_part = kBodyParts[static_cast<std::size_t>(unif(rng) * 6.0) % 6];
                out.injuries.push_back(std::move(ev));
            }
            const bool subj_missing = unif(rng) < spec.subjective_missing_rate;
            const bool obj_missing = unif(rng) < spec.objective_missing_rate;
            PlayerDay rec;
            rec.player_id = id;
            rec.date = start + d;
            bool any = false;
            for (std::size_t f = 0; f < nf; ++f) {
                const auto& sf = spec.features[f];
                const double noisy =
                    std::clamp(truth.value(day, f) + spec.noise_sd * sf.sd * normal(rng), sf.lo, sf.hi);
                const bool missing = subjective_group(sf.field) ? subj_missing : obj_missing;
                if (missing) continue;
                seen.set(day, f, noisy);
                rec[sf.field] = noisy;
                any = true;
            }
            if (rec[Field::rpe] && rec[Field::duration_subj])
                rec[Field::srpe] = *rec[Field::rpe] * *rec[Field::duration_subj];
            if (rec[Field::distance] && rec[Field::duration_obj] && *rec[Field::duration_obj] > 0.0)
                rec[Field::distance_per_min] = *rec[Field::distance] / *rec[Field::duration_obj];
            if (any) out.records.push_back(std::move(rec));
        }
    }
    std::stable_sort(out.injuries.begin(), out.injuries.end(), [](const auto& a, const auto& b) {
        if (a.player_id != b.player_id) return a.player_id < b.player_id;
        return a.date < b.date;
    });
    return out;
}

double oracle_risk(const HazardSpec& spec, const FeaturePanel& truth, std::string_view player,
                   Date date) {
    const auto p = truth.player_index(player);
    if (!p) throw DataError("unknown player: " + std::string(player));
    const auto day = truth.track(*p).day_of(date);
    if (!day) throw DataError("date outside the synthetic calendar: " + date.iso());
    return daily_hazard(spec, truth.track(*p), *day);
}

double oracle_horizon_risk(const HazardSpec& spec, const FeaturePanel& truth,
                           std::string_view player, Date anchor, int horizon) {
    const auto p = truth.player_index(player);
    if (!p) throw DataError("unknown player: " + std::string(player));
    const auto& t = truth.track(*p);
    double survive = 1.0;
    for (int k = 1; k <= horizon; ++k)
        if (const auto day = t.day_of(anchor + k)) survive *= 1.0 - daily_hazard(spec, t, *day);
    return 1.0 - survive;
}

}  // namespace injurycast
