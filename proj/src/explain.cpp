#include "injurycast/explain.hpp"

#include <Eigen/Dense>
#include <bit>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "injurycast/errors.hpp"
#include "injurycast/features.hpp"

namespace injurycast {

namespace {

using Mask = std::vector<char>;

/// Mean score over the background with features outside `mask` replaced.
double coalition_value(const ScoreFn& score, std::span<const double> x, const Mask& mask,
                       const std::vector<std::vector<double>>& background) {
    std::vector<double> z(x.size());
    double acc = 0.0;
    for (const auto& b : background) {
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = mask[i] ? x[i] : b[i];
        acc += score(z);
    }
    return acc / static_cast<double>(background.size());
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<double> exact_shapley(const ScoreFn& score, std::span<const double> x,
                                  const std::vector<std::vector<double>>& background,
                                  double& base) {
    const int m = static_cast<int>(x.size());
    const std::size_t n_masks = std::size_t{1} << m;
    std::vector<double> v(n_masks);
    Mask mask(x.size());
    for (std::size_t bits = 0; bits < n_masks; ++bits) {
        for (int i = 0; i < m; ++i) mask[static_cast<std::size_t>(i)] = (bits >> i) & 1U;
        v[bits] = coalition_value(score, x, mask, background);
    }
    base = v[0];
    std::vector<double> weight(static_cast<std::size_t>(m));
    for (int s = 0; s < m; ++s) weight[static_cast<std::size_t>(s)] = 1.0 / (m * binomial(m - 1, s));
    std::vector<double> phi(static_cast<std::size_t>(m), 0.0);
    for (std::size_t bits = 0; bits < n_masks; ++bits) {
        const int s = std::popcount(bits);
        for (int i = 0; i < m; ++i) {
            if ((bits >> i) & 1U) continue;
            phi[static_cast<std::size_t>(i)] +=
                weight[static_cast<std::size_t>(s)] * (v[bits | (std::size_t{1} << i)] - v[bits]);
        }
    }
    return phi;
}

struct Coalition {
    Mask mask;
    double weight;
};

std::vector<double> sampled_shapley(const ScoreFn& score, std::span<const double> x,
                                    const std::vector<std::vector<double>>& background,
                                    const ShapOptions& opt, double& base, double prediction) {
    const int m = static_cast<int>(x.size());
    Mask empty(x.size(), 0);
    base = coalition_value(score, x, empty, background);
    const double delta = prediction - base;
    if (m == 1) return {delta};

    auto kernel_mass = [m](int s) { return (m - 1.0) / (static_cast<double>(s) * (m - s)); };

    std::vector<Coalition> coalitions;
    long long budget = std::max(2, opt.n_coalitions);
    std::vector<int> remaining_sizes;
    // Enumerate complementary size groups (s, m - s) while the budget covers them.
    for (int s = 1; s <= m / 2; ++s) {
        const int partner = m - s;
        const double count = binomial(m, s) * (partner == s ? 1.0 : 2.0);
        if (static_cast<double>(budget) >= count) {
            budget -= static_cast<long long>(count);
            for (int size : partner == s ? std::vector<int>{s} : std::vector<int>{s, partner}) {
                const double w = kernel_mass(size) / binomial(m, size);
                std::vector<int> idx(static_cast<std::size_t>(size));
                std::iota(idx.begin(), idx.end(), 0);
                while (true) {
                    Mask mk(x.size(), 0);
                    for (int i : idx) mk[static_cast<std::size_t>(i)] = 1;
                    coalitions.push_back({std::move(mk), w});
                    int k = size - 1;
                    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - size + k) --k;
                    if (k < 0) break;
                    ++idx[static_cast<std::size_t>(k)];
                    for (int j = k + 1; j < size; ++j)
                        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
                }
            }
        } else {
            remaining_sizes.push_back(s);
            if (partner != s) remaining_sizes.push_back(partner);
        }
    }

    if (!remaining_sizes.empty() && budget >= 2) {
        std::vector<double> size_w;
        double total = 0.0;
        for (int s : remaining_sizes) {
            size_w.push_back(kernel_mass(s));
            total += kernel_mass(s);
        }
        std::mt19937_64 rng(opt.seed);
        std::discrete_distribution<std::size_t> pick_size(size_w.begin(), size_w.end());
        const long long pairs = budget / 2;
        const double w = total / static_cast<double>(2 * pairs);
        std::vector<int> perm(static_cast<std::size_t>(m));
        for (long long k = 0; k < pairs; ++k) {
            const int s = remaining_sizes[pick_size(rng)];
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = 0; i < s; ++i) {
                std::uniform_int_distribution<int> pick(i, m - 1);
                std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
            }
            Mask mk(x.size(), 0);
            for (int i = 0; i < s; ++i) mk[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 1;
            Mask complement(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) complement[i] = !mk[i];
            coalitions.push_back({std::move(mk), w});
            coalitions.push_back({std::move(complement), w});
        }
    }

    // Eliminate the last feature through sum(phi) = delta and solve weighted least squares.
    const int q = m - 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd row(q);
    for (const auto& c : coalitions) {
        const double value = coalition_value(score, x, c.mask, background);
        const double last = c.mask[static_cast<std::size_t>(q)] ? 1.0 : 0.0;
        const double y = value - base - last * delta;
        for (int j = 0; j < q; ++j) row[j] = (c.mask[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - last;
        a.noalias() += c.weight * row * row.transpose();
        rhs += c.weight * y * row;
    }
    const Eigen::VectorXd sol = a.completeOrthogonalDecomposition().solve(rhs);
    std::vector<double> phi(static_cast<std::size_t>(m));
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
        phi[static_cast<std::size_t>(j)] = sol[j];
        acc += sol[j];
    }
    phi[static_cast<std::size_t>(q)] = delta - acc;
    return phi;
}

struct AnchorRow {
    Date date;
    std::vector<double> x;  // standardized
};

std::vector<AnchorRow> standardized_anchors(const DeepHitModel& model, const FeaturePanel& panel,
                                            std::string_view player) {
    if (panel.feature_names() != model.feature_names)
        throw DataError("panel features do not match the model's feature order");
    const auto p = panel.player_index(player);
    if (!p) throw DataError("unknown player: " + std::string(player));
    const FeaturePanel agg = rolling_means(panel, model.lookback);
    const auto& t = agg.track(*p);
    std::vector<AnchorRow> out;
    std::vector<double> raw(agg.n_features());
    for (std::size_t d = static_cast<std::size_t>(model.lookback - 1); d < t.n_days(); ++d) {
        for (std::size_t f = 0; f < raw.size(); ++f) raw[f] = t.value(d, f);
        out.push_back({t.first_date() + static_cast<int>(d), apply_scaler(model.scaler, raw)});
    }
    return out;
}

ScoreFn risk_score_fn(const DeepHitModel& model) {
    return [&model](std::span<const double> z) { return risk_score(model.net.forward(z)); };
}

}  // namespace

Attribution kernel_shap(const ScoreFn& score, std::span<const double> x,
                        const std::vector<std::vector<double>>& background,
                        const ShapOptions& opt) {
    if (background.empty()) throw std::invalid_argument("kernel_shap needs a background sample");
    for (const auto& b : background)
        if (b.size() != x.size()) throw std::invalid_argument("background row dimension mismatch");
    Attribution a;
    a.prediction = score(x);
    if (x.empty()) {
        a.base_value = a.prediction;
        return a;
    }
    if (static_cast<int>(x.size()) <= opt.exact_max_features)
        a.phi = exact_shapley(score, x, background, a.base_value);
    else
        a.phi = sampled_shapley(score, x, background, opt, a.base_value, a.prediction);
    return a;
}

std::vector<std::pair<std::string, double>> top_features(const Attribution& a, std::size_t k) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < a.phi.size(); ++i)
        out.emplace_back(i < a.feature_names.size() ? a.feature_names[i] : std::to_string(i), a.phi[i]);
    std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
        if (std::abs(l.second) != std::abs(r.second)) return std::abs(l.second) > std::abs(r.second);
        return l.first < r.first;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

std::vector<std::vector<double>> sample_background(const std::vector<std::vector<double>>& rows,
                                                   std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, idx.size()));
    std::sort(idx.begin(), idx.end());
    std::vector<std::vector<double>> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(rows[i]);
    return out;
}

Attribution day_explanation(const ExplainContext& ctx, const FeaturePanel& panel,
                            std::string_view player, Date date) {
    const auto rows = standardized_anchors(ctx.model, panel, player);
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.date == date; });
    if (it == rows.end())
        throw DataError("no eligible anchor for " + std::string(player) + " on " + date.iso());
    Attribution a = kernel_shap(risk_score_fn(ctx.model), it->x, ctx.background, ctx.options);
    a.player_id = std::string(player);
    a.date = date;
    a.feature_names = ctx.model.feature_names;
    return a;
}

std::vector<FeatureImportance> season_importance(const ExplainContext& ctx,
                                                 const FeaturePanel& panel,
                                                 std::string_view player) {
    const auto rows = standardized_anchors(ctx.model, panel, player);
    const auto score = risk_score_fn(ctx.model);
    const std::size_t nf = ctx.model.feature_names.size();
    std::vector<double> acc(nf, 0.0);
    for (const auto& r : rows) {
        const Attribution a = kernel_shap(score, r.x, ctx.background, ctx.options);
        for (std::size_t f = 0; f < nf; ++f) acc[f] += std::abs(a.phi[f]);
    }
    std::vector<FeatureImportance> out;
    for (std::size_t f = 0; f < nf; ++f)
        out.push_back({ctx.model.feature_names[f],
                       rows.empty() ? 0.0 : acc[f] / static_cast<double>(rows.size())});
    std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
        if (l.mean_abs_phi != r.mean_abs_phi) return l.mean_abs_phi > r.mean_abs_phi;
        return l.feature < r.feature;
    });
    return out;
}

}  // namespace injurycast
