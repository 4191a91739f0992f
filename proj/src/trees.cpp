#include "injurycast/trees.hpp"

#include <algorithm>
#include <numeric>

namespace injurycast {

namespace {

constexpr double kMinGain = 1e-12;

struct NodeStats {
    double a = 0.0;
    double b = 0.0;
    std::size_t n = 0;
};

double impurity_score(SplitCriterion c, const NodeStats& s, double lambda) {
    if (c == SplitCriterion::gini) {
        if (s.b <= 0.0) return 0.0;
        // Weighted Gini impurity n * (1 - p^2 - (1-p)^2), negated so larger is better.
        return -2.0 * s.a * (s.b - s.a) / s.b;
    }
    return 0.5 * s.a * s.a / (s.b + lambda);
}

double leaf_value(SplitCriterion c, const NodeStats& s, double lambda) {
    if (c == SplitCriterion::gini) return s.b > 0.0 ? s.a / s.b : 0.0;
    return -s.a / (s.b + lambda);
}

struct Grower {
    std::span<const std::vector<double>> x;
    std::span<const double> a;
    std::span<const double> b;
    SplitCriterion criterion;
    const TreeParams& params;
    std::mt19937_64& rng;
    std::vector<double>& importance;
    std::vector<TreeNode>& nodes;
    std::size_t n_features;

    NodeStats stats_of(const std::vector<std::size_t>& rows) const {
        NodeStats s;
        for (auto r : rows) {
            s.a += a[r];
            s.b += b[r];
        }
        s.n = rows.size();
        return s;
    }

    bool child_ok(const NodeStats& s) const {
        if (s.n < static_cast<std::size_t>(std::max(1, params.min_leaf))) return false;
        if (criterion == SplitCriterion::newton && s.b < params.min_child_weight) return false;
        return true;
    }

    int grow(std::vector<std::size_t> rows, int depth) {
        const NodeStats parent = stats_of(rows);
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[static_cast<std::size_t>(id)].value = leaf_value(criterion, parent, params.lambda);
        if (depth >= params.max_depth || rows.size() < 2) return id;

        std::vector<std::size_t> candidates(n_features);
        std::iota(candidates.begin(), candidates.end(), 0);
        const auto k = static_cast<std::size_t>(params.features_per_split);
        if (k > 0 && k < n_features) {
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n_features - 1);
                std::swap(candidates[i], candidates[pick(rng)]);
            }
            candidates.resize(k);
            std::sort(candidates.begin(), candidates.end());
        }

        const double parent_score = impurity_score(criterion, parent, params.lambda);
        double best_gain = kMinGain;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> sorted = rows;
        for (auto f : candidates) {
            std::stable_sort(sorted.begin(), sorted.end(),
                             [&](std::size_t l, std::size_t r) { return x[l][f] < x[r][f]; });
            NodeStats left;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                const auto r = sorted[i];
                left.a += a[r];
                left.b += b[r];
                ++left.n;
                const double v = x[r][f];
                const double next = x[sorted[i + 1]][f];
                if (next <= v) continue;
                const NodeStats right{parent.a - left.a, parent.b - left.b, parent.n - left.n};
                if (!child_ok(left) || !child_ok(right)) continue;
                const double gain = impurity_score(criterion, left, params.lambda) +
                                    impurity_score(criterion, right, params.lambda) - parent_score;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (v + next);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> lrows, rrows;
        for (auto r : rows)
            (x[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? lrows : rrows).push_back(r);
        importance[static_cast<std::size_t>(best_feature)] += best_gain;
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(lrows), depth + 1);
        const int r = grow(std::move(rrows), depth + 1);
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

int depth_of(const std::vector<TreeNode>& nodes, int id) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_of(nodes, n.left), depth_of(nodes, n.right));
}

}  // namespace

double DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
    }
    return nodes_[i].value;
}

int DecisionTree::depth() const { return nodes_.empty() ? 0 : depth_of(nodes_, 0); }

DecisionTree grow_tree(std::span<const std::vector<double>> x, std::span<const double> stat_a,
                       std::span<const double> stat_b, std::span<const std::size_t> rows,
                       SplitCriterion criterion, const TreeParams& params, std::mt19937_64& rng,
                       std::vector<double>& importance) {
    DecisionTree tree;
    const std::size_t nf = x.empty() ? 0 : x.front().size();
    if (importance.size() < nf) importance.resize(nf, 0.0);
    Grower g{x, stat_a, stat_b, criterion, params, rng, importance, tree.nodes(), nf};
    g.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return tree;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace injurycast
