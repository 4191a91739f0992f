#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "injurycast/baselines.hpp"
#include "injurycast/date.hpp"
#include "injurycast/deephit.hpp"
#include "injurycast/panel.hpp"

namespace testsupport {

inline injurycast::Date day(int n) { return injurycast::Date::from_ymd(2020, 1, 1) + n; }

/// Random panel: `players` tracks of random length, values N(mu_f, 1) with
/// missingness `p_missing` per cell.
inline injurycast::FeaturePanel random_panel(std::mt19937_64& rng, int players, int features,
                                             double p_missing, int min_days = 5, int max_days = 40) {
    std::vector<std::string> names;
    for (int f = 0; f < features; ++f) names.push_back("f" + std::to_string(f));
    injurycast::FeaturePanel panel(names);
    std::uniform_int_distribution<int> len(min_days, max_days);
    std::uniform_int_distribution<int> offset(0, 10);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution missing(p_missing);
    for (int p = 0; p < players; ++p) {
        auto& t = panel.add_player("p" + std::to_string(p), day(offset(rng)),
                                   static_cast<std::size_t>(len(rng)));
        for (std::size_t d = 0; d < t.n_days(); ++d)
            for (std::size_t f = 0; f < t.n_features(); ++f)
                if (!missing(rng)) t.set(d, f, 10.0 * static_cast<double>(f) + normal(rng));
    }
    return panel;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    auto p = std::filesystem::temp_directory_path() /
             ("injurycast-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / scale;
}

/// Random standardized survival batch with at least one event.
inline std::vector<injurycast::SurvivalSample> random_survival_batch(std::mt19937_64& rng, int n, int dim,
                                                                    int bins) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> time(1, bins);
    std::bernoulli_distribution event(0.5);
    std::vector<injurycast::SurvivalSample> batch(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto& s = batch[i];
        s.player_id = "p" + std::to_string(i);
        s.anchor_date = day(static_cast<int>(i));
        for (int k = 0; k < dim; ++k) s.x.push_back(normal(rng));
        s.time_to_event = time(rng);
        s.event = i == 0 || event(rng) ? 1 : 0;
    }
    return batch;
}

/// Random nonzero biases, so the check avoids exact ReLU kinks of zero-initialized units.
inline void randomize_biases(injurycast::DeepHitNet& net, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& layer : net.layers())
        for (auto& b : layer.bias) b = u(rng);
}

/// Max elementwise relative error between analytic and central-difference gradients.
/// Components where both are below `floor` in magnitude are compared absolutely.
template <typename Objective>
double max_fd_error(const std::vector<double>& theta, const std::vector<double>& analytic, Objective f,
                    double h = 1e-5, double floor = 1e-6) {
    double worst = 0.0;
    auto p = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        p[i] = theta[i] + h;
        const double up = f(p);
        p[i] = theta[i] - h;
        const double down = f(p);
        p[i] = theta[i];
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
    return worst;
}

inline double deephit_fd_error(const injurycast::DeepHitNet& net,
                               const std::vector<injurycast::SurvivalSample>& batch,
                               const injurycast::DeepHitConfig& cfg) {
    const auto g = injurycast::gradients(net, batch, cfg).flat();
    auto probe = net;
    return max_fd_error(net.parameters(), g, [&](const std::vector<double>& theta) {
        probe.set_parameters(theta);
        return injurycast::loss(probe, batch, cfg).total;
    });
}

inline double logreg_fd_error(const injurycast::LogisticRegression& m,
                              const std::vector<injurycast::BinarySample>& rows, double l2) {
    auto theta = m.weights;
    theta.push_back(m.bias);
    const auto g = injurycast::logreg_gradient(m, rows, l2);
    return max_fd_error(theta, g, [&](const std::vector<double>& t) {
        injurycast::LogisticRegression probe;
        probe.weights.assign(t.begin(), t.end() - 1);
        probe.bias = t.back();
        return injurycast::logreg_objective(probe, rows, l2);
    }, 1e-6, 1e-6);
}

}  // namespace testsupport
