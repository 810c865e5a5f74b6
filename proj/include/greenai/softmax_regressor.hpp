#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "greenai/classifier.hpp"
#include "greenai/numeric.hpp"

namespace greenai {

struct SoftmaxConfig {
    double learning_rate = 0.5;
    int epochs = 1000;
    std::uint64_t seed = 42;
    double feature_scale = 1.0;
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// the class-weighted cross-entropy. With balanced weighting each present
/// class c gets weight n / (k_present * n_c), so rare classes pull as hard as
/// common ones. Parameters start at zero, making training deterministic.
class SoftmaxRegressor final : public Classifier {
public:
    explicit SoftmaxRegressor(SoftmaxConfig cfg = {}, bool balanced = true)
        : cfg_(cfg), balanced_(balanced) {
        if (cfg_.epochs < 0) throw std::invalid_argument("SoftmaxConfig: epochs must be >= 0");
        if (!(cfg_.feature_scale > 0.0))
            throw std::invalid_argument("SoftmaxConfig: feature_scale must be positive");
    }

    void fit(const Dataset& train) override {
        num_classes_ = train.num_classes();
        feature_dim_ = train.feature_dim();
        const std::size_t n = train.size();
        const auto C = static_cast<std::size_t>(num_classes_);
        const auto D = static_cast<std::size_t>(feature_dim_);

        class_weights_ = compute_class_weights(train);

        // scaled feature copy so the training loop stays a plain dot product
        std::vector<double> x(n * D);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = train.row(i);
            for (std::size_t c = 0; c < D; ++c) x[i * D + c] = r[c] / cfg_.feature_scale;
        }

        weights_.assign(C * D, 0.0);
        bias_.assign(C, 0.0);
        std::vector<double> grad_w(C * D), grad_b(C), p(C);

        double weight_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            weight_sum += class_weights_[static_cast<std::size_t>(train.label(i))];

        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double* xi = x.data() + i * D;
                for (std::size_t c = 0; c < C; ++c) {
                    double acc = bias_[c];
                    const double* w = weights_.data() + c * D;
                    for (std::size_t d = 0; d < D; ++d) acc += w[d] * xi[d];
                    p[c] = acc;
                }
                detail::stable_softmax_inplace(p);
                const int y = train.label(i);
                const double wi = class_weights_[static_cast<std::size_t>(y)];
                for (std::size_t c = 0; c < C; ++c) {
                    const double g = wi * (p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0));
                    grad_b[c] += g;
                    double* gw = grad_w.data() + c * D;
                    for (std::size_t d = 0; d < D; ++d) gw[d] += g * xi[d];
                }
            }
            const double step = cfg_.learning_rate / weight_sum;
            for (std::size_t k = 0; k < weights_.size(); ++k) weights_[k] -= step * grad_w[k];
            for (std::size_t c = 0; c < C; ++c) bias_[c] -= step * grad_b[c];
        }
        fitted_ = true;
    }

    Scored evaluate(std::span<const double> x) const override {
        // reused scratch keeps the hot routing path allocation-free
        thread_local std::vector<double> scratch;
        scratch.resize(static_cast<std::size_t>(num_classes_));
        fill_logits(x, scratch);
        // label from the logit argmax, confidence from the softmax of the
        // same logits; softmax is monotone so the two always agree
        const int label = detail::argmax(scratch);
        detail::stable_softmax_inplace(scratch);
        return Scored{label, scratch[static_cast<std::size_t>(label)]};
    }

    /// Label only: the logit argmax, skipping the softmax entirely. This is
    /// the router's hot path.
    int predict(std::span<const double> x) const override {
        require_fitted();
        if (static_cast<int>(x.size()) != feature_dim_)
            throw std::invalid_argument("SoftmaxRegressor: feature vector has wrong length");
        const auto D = static_cast<std::size_t>(feature_dim_);
        int best = 0;
        double best_logit = 0.0;
        for (int c = 0; c < num_classes_; ++c) {
            double acc = 0.0;
            const double* w = weights_.data() + static_cast<std::size_t>(c) * D;
            for (std::size_t d = 0; d < D; ++d) acc += w[d] * x[d];
            const double logit = acc / cfg_.feature_scale + bias_[static_cast<std::size_t>(c)];
            if (c == 0 || logit > best_logit) {
                best_logit = logit;
                best = c;
            }
        }
        return best;
    }

    std::vector<double> probabilities(std::span<const double> x) const {
        std::vector<double> p(static_cast<std::size_t>(num_classes_));
        fill_logits(x, p);
        detail::stable_softmax_inplace(p);
        return p;
    }

    bool fitted() const override { return fitted_; }
    bool balanced() const { return balanced_; }
    const SoftmaxConfig& config() const { return cfg_; }
    int num_classes() const { return num_classes_; }
    int feature_dim() const { return feature_dim_; }
    const std::vector<double>& weights() const { return weights_; } // row-major C x D
    const std::vector<double>& bias() const { return bias_; }
    const std::vector<double>& class_weights() const { return class_weights_; }

    /// Rebuild a fitted regressor from serialized parameters.
    static SoftmaxRegressor from_parameters(SoftmaxConfig cfg, bool balanced, int num_classes,
                                            int feature_dim, std::vector<double> weights,
                                            std::vector<double> bias,
                                            std::vector<double> class_weights) {
        SoftmaxRegressor m(cfg, balanced);
        if (weights.size() != static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(feature_dim) ||
            bias.size() != static_cast<std::size_t>(num_classes))
            throw std::invalid_argument("SoftmaxRegressor: parameter shapes do not match");
        m.num_classes_ = num_classes;
        m.feature_dim_ = feature_dim;
        m.weights_ = std::move(weights);
        m.bias_ = std::move(bias);
        m.class_weights_ = std::move(class_weights);
        m.fitted_ = true;
        return m;
    }

private:
    void fill_logits(std::span<const double> x, std::span<double> out) const {
        require_fitted();
        if (static_cast<int>(x.size()) != feature_dim_)
            throw std::invalid_argument("SoftmaxRegressor: feature vector has wrong length");
        const auto C = static_cast<std::size_t>(num_classes_);
        const auto D = static_cast<std::size_t>(feature_dim_);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = 0.0;
            const double* w = weights_.data() + c * D;
            for (std::size_t d = 0; d < D; ++d) acc += w[d] * x[d];
            out[c] = acc / cfg_.feature_scale + bias_[c]; // W (x / s) + b, scale folded out
        }
    }

    std::vector<double> compute_class_weights(const Dataset& train) const {
        const auto C = static_cast<std::size_t>(train.num_classes());
        std::vector<double> w(C, 1.0);
        if (!balanced_) return w;
        std::vector<std::size_t> counts(C, 0);
        for (std::size_t i = 0; i < train.size(); ++i)
            ++counts[static_cast<std::size_t>(train.label(i))];
        std::size_t present = 0;
        for (std::size_t c : counts) present += c > 0 ? 1 : 0;
        for (std::size_t c = 0; c < C; ++c)
            if (counts[c] > 0)
                w[c] = static_cast<double>(train.size()) /
                       (static_cast<double>(present) * static_cast<double>(counts[c]));
        return w;
    }

    SoftmaxConfig cfg_;
    bool balanced_;
    int num_classes_ = 0;
    int feature_dim_ = 0;
    std::vector<double> weights_;
    std::vector<double> bias_;
    std::vector<double> class_weights_;
    bool fitted_ = false;
};

} // namespace greenai
