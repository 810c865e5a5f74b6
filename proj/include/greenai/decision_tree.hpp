#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "greenai/classifier.hpp"
#include "greenai/dataset.hpp"

namespace greenai {

/// Depth-limited CART classification tree grown by greedy Gini minimization.
///
/// Split candidates are midpoints between consecutive distinct sorted feature
/// values; candidates are scanned in (feature index, threshold) order and a
/// split is only replaced on strict improvement, so ties resolve to the
/// lowest feature index and lowest threshold. Growth stops at max_depth, on a
/// pure node, on a node smaller than 2 samples, or when no candidate exists.
/// Leaves keep the class-count histogram of the training samples they
/// absorbed; the leaf confidence is the majority-class share of that
/// histogram.
class DecisionTree final : public Classifier {
public:
    struct Node {
        int feature = -1;       // -1 for leaves
        double threshold = 0.0; // x[feature] <= threshold goes left
        int left = -1;
        int right = -1;
        std::vector<std::int64_t> counts; // leaf histogram; empty on internal nodes
        int label = -1;                   // leaf majority class
        double confidence = 0.0;          // leaf purity

        bool is_leaf() const { return feature < 0; }
    };

    explicit DecisionTree(int max_depth = 5) : max_depth_(max_depth) {
        if (max_depth_ < 1) throw std::invalid_argument("DecisionTree: max_depth must be >= 1");
    }

    void fit(const Dataset& train) override {
        nodes_.clear();
        num_classes_ = train.num_classes();
        feature_dim_ = train.feature_dim();
        std::vector<std::size_t> all(train.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        build(train, all, 0);
        fitted_ = true;
    }

    Scored evaluate(std::span<const double> x) const override {
        const Node& leaf = nodes_[static_cast<std::size_t>(leaf_for(x))];
        return Scored{leaf.label, leaf.confidence};
    }

    /// Index into nodes() of the leaf that absorbs x.
    int leaf_for(std::span<const double> x) const {
        require_fitted();
        if (static_cast<int>(x.size()) != feature_dim_)
            throw std::invalid_argument("DecisionTree: feature vector has wrong length");
        int i = 0;
        while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return i;
    }

    bool fitted() const override { return fitted_; }
    int max_depth() const { return max_depth_; }
    int num_classes() const { return num_classes_; }
    int feature_dim() const { return feature_dim_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    int depth() const { return fitted_ ? depth_below(0) : 0; }

    /// Rebuild a fitted tree from serialized structure.
    static DecisionTree from_structure(int max_depth, int feature_dim, int num_classes,
                                       std::vector<Node> nodes) {
        DecisionTree t(max_depth);
        if (nodes.empty()) throw std::invalid_argument("DecisionTree: empty node list");
        t.feature_dim_ = feature_dim;
        t.num_classes_ = num_classes;
        t.nodes_ = std::move(nodes);
        t.fitted_ = true;
        return t;
    }

private:
    int depth_below(int node) const {
        const Node& n = nodes_[static_cast<std::size_t>(node)];
        if (n.is_leaf()) return 0;
        return 1 + std::max(depth_below(n.left), depth_below(n.right));
    }

    int build(const Dataset& data, const std::vector<std::size_t>& idx, int level) {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes_), 0);
        for (std::size_t i : idx) ++counts[static_cast<std::size_t>(data.label(i))];
        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }) == 1;

        int feature = -1;
        double threshold = 0.0;
        if (!pure && idx.size() >= 2 && level < max_depth_)
            find_best_split(data, idx, counts, feature, threshold);

        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        if (feature < 0) {
            make_leaf(nodes_.back(), std::move(counts));
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (data.row(i)[static_cast<std::size_t>(feature)] <= threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }

        nodes_[static_cast<std::size_t>(node_id)].feature = feature;
        nodes_[static_cast<std::size_t>(node_id)].threshold = threshold;
        const int left = build(data, left_idx, level + 1);
        const int right = build(data, right_idx, level + 1);
        nodes_[static_cast<std::size_t>(node_id)].left = left;
        nodes_[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    static void make_leaf(Node& n, std::vector<std::int64_t> counts) {
        std::int64_t total = 0, best = -1;
        int label = 0;
        for (int c = 0; c < static_cast<int>(counts.size()); ++c) {
            total += counts[static_cast<std::size_t>(c)];
            if (counts[static_cast<std::size_t>(c)] > best) { // ties keep the lowest class index
                best = counts[static_cast<std::size_t>(c)];
                label = c;
            }
        }
        n.label = label;
        n.confidence = static_cast<double>(best) / static_cast<double>(total);
        n.counts = std::move(counts);
    }

    // Minimizing the weighted Gini impurity of a binary split is equivalent to
    // maximizing sumsq_left/n_left + sumsq_right/n_right, where sumsq is the
    // sum of squared class counts on each side. Counts stay integral, so the
    // sweep is exact and candidate order fully determines tie-breaking.
    void find_best_split(const Dataset& data, const std::vector<std::size_t>& idx,
                         const std::vector<std::int64_t>& node_counts, int& best_feature,
                         double& best_threshold) const {
        const std::size_t n = idx.size();
        double best_score = -1.0;

        std::vector<std::pair<double, int>> column(n);
        std::vector<std::int64_t> left(static_cast<std::size_t>(num_classes_));
        std::vector<std::int64_t> right(static_cast<std::size_t>(num_classes_));

        for (int f = 0; f < feature_dim_; ++f) {
            for (std::size_t j = 0; j < n; ++j)
                column[j] = {data.row(idx[j])[static_cast<std::size_t>(f)], data.label(idx[j])};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::fill(left.begin(), left.end(), 0);
            std::copy(node_counts.begin(), node_counts.end(), right.begin());
            std::int64_t sumsq_left = 0, sumsq_right = 0;
            for (std::int64_t c : node_counts) sumsq_right += c * c;

            for (std::size_t j = 0; j + 1 < n; ++j) {
                const int y = column[j].second;
                auto& cl = left[static_cast<std::size_t>(y)];
                auto& cr = right[static_cast<std::size_t>(y)];
                sumsq_left += 2 * cl + 1;
                sumsq_right -= 2 * cr - 1;
                ++cl;
                --cr;

                if (column[j].first == column[j + 1].first) continue; // not a boundary

                const auto nl = static_cast<double>(j + 1);
                const auto nr = static_cast<double>(n - j - 1);
                const double score =
                    static_cast<double>(sumsq_left) / nl + static_cast<double>(sumsq_right) / nr;
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = (column[j].first + column[j + 1].first) / 2.0;
                }
            }
        }
    }

    int max_depth_;
    int num_classes_ = 0;
    int feature_dim_ = 0;
    std::vector<Node> nodes_;
    bool fitted_ = false;
};

} // namespace greenai
