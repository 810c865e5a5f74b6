#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "greenai/rng.hpp"

namespace greenai {

/// Immutable labeled dataset: n rows of feature_dim real-valued features,
/// each with a dense class index in [0, num_classes).
class Dataset {
public:
    /// features is row-major (n * feature_dim). Throws std::invalid_argument
    /// on shape mismatch, empty data, labels out of range, or num_classes < 2.
    Dataset(std::vector<double> features, std::vector<int> labels,
            int feature_dim, int num_classes)
        : features_(std::move(features)),
          labels_(std::move(labels)),
          feature_dim_(feature_dim),
          num_classes_(num_classes) {
        if (feature_dim_ <= 0)
            throw std::invalid_argument("Dataset: feature_dim must be positive");
        if (num_classes_ < 2)
            throw std::invalid_argument("Dataset: num_classes must be >= 2");
        if (labels_.empty())
            throw std::invalid_argument("Dataset: need at least one instance");
        if (features_.size() != labels_.size() * static_cast<std::size_t>(feature_dim_))
            throw std::invalid_argument("Dataset: features size does not match n * feature_dim");
        for (int y : labels_) {
            if (y < 0 || y >= num_classes_)
                throw std::invalid_argument("Dataset: label " + std::to_string(y) +
                                            " outside [0, " + std::to_string(num_classes_) + ")");
        }
    }

    std::size_t size() const { return labels_.size(); }
    int feature_dim() const { return feature_dim_; }
    int num_classes() const { return num_classes_; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * static_cast<std::size_t>(feature_dim_),
                static_cast<std::size_t>(feature_dim_)};
    }
    int label(std::size_t i) const { return labels_[i]; }

    const std::vector<double>& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }

    /// New dataset holding the given rows (in order). Class/feature metadata
    /// is inherited unchanged.
    Dataset subset(std::span<const std::size_t> indices) const {
        if (indices.empty())
            throw std::invalid_argument("Dataset::subset: empty index set");
        std::vector<double> f;
        f.reserve(indices.size() * static_cast<std::size_t>(feature_dim_));
        std::vector<int> y;
        y.reserve(indices.size());
        for (std::size_t i : indices) {
            auto r = row(i);
            f.insert(f.end(), r.begin(), r.end());
            y.push_back(labels_[i]);
        }
        return Dataset(std::move(f), std::move(y), feature_dim_, num_classes_);
    }

private:
    std::vector<double> features_;
    std::vector<int> labels_;
    int feature_dim_;
    int num_classes_;
};

/// Train/validation/test partition parameters. Fractions must each lie in
/// (0, 1) and sum to 1 within 1e-9.
struct SplitSpec {
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::uint64_t seed = 42;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Shuffle 0..n-1 with the seeded generator and cut into three parts.
/// Part sizes: floor(n * val_fraction) and floor(n * test_fraction); every
/// leftover instance goes to the training part.
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("SplitSpec: fractions sum to " + std::to_string(sum) +
                                    ", expected 1");
    for (double f : {spec.train_fraction, spec.val_fraction, spec.test_fraction}) {
        if (!(f > 0.0 && f < 1.0))
            throw std::invalid_argument("SplitSpec: every fraction must lie in (0, 1)");
    }

    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val_fraction));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_fraction));
    if (n_val + n_test >= n || n_val == 0 || n_test == 0)
        throw std::invalid_argument("split: a part would be empty for n = " + std::to_string(n));
    const std::size_t n_train = n - n_val - n_test;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    SplitMix64 rng(spec.seed);
    rng.shuffle(perm);

    SplitIndices out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                   perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return out;
}

struct DatasetSplit {
    Dataset train;
    Dataset val;
    Dataset test;
    SplitIndices indices;
};

/// Deterministic shuffled split. Identical (dataset, spec) pairs produce
/// identical partitions.
inline DatasetSplit split(const Dataset& dataset, const SplitSpec& spec) {
    SplitIndices idx = split_indices(dataset.size(), spec);
    return DatasetSplit{dataset.subset(idx.train), dataset.subset(idx.val),
                        dataset.subset(idx.test), std::move(idx)};
}

/// Fraction of positions where predictions and labels agree.
inline double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("accuracy: size mismatch (" +
                                    std::to_string(predictions.size()) + " vs " +
                                    std::to_string(labels.size()) + ")");
    if (predictions.empty())
        throw std::invalid_argument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

} // namespace greenai
