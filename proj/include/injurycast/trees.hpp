#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace injurycast {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

class DecisionTree {
public:
    /// x[feature] <= threshold goes left.
    double predict(std::span<const double> x) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::vector<TreeNode>& nodes() { return nodes_; }
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
};

/// gini: stats are (label, 1), leaves predict the positive fraction.
/// newton: stats are (gradient, hessian), leaves predict -G / (H + lambda).
enum class SplitCriterion { gini, newton };

struct TreeParams {
    int max_depth = 6;
    int min_leaf = 1;
    /// Features tried per split; 0 or >= n_features means all.
    int features_per_split = 0;
    double lambda = 1.0;
    double min_child_weight = 0.0;
};

/// Exact greedy CART growth over `rows` (indices into x; repeats act as weights).
/// Split gains are added to `importance[feature]`.
DecisionTree grow_tree(std::span<const std::vector<double>> x, std::span<const double> stat_a,
                       std::span<const double> stat_b, std::span<const std::size_t> rows,
                       SplitCriterion criterion, const TreeParams& params, std::mt19937_64& rng,
                       std::vector<double>& importance);

/// SplitMix64 step, used to derive independent per-index seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace injurycast
