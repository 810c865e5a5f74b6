#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenai/classifier.hpp"
#include "greenai/numeric.hpp"
#include "greenai/rng.hpp"

namespace greenai {

struct NetConfig {
    std::vector<int> hidden_sizes = {128, 64, 32, 24, 16};
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 200;
    std::uint64_t seed = 42;
    double feature_scale = 1.0; // inputs are divided by this before the first layer
};

/// Fully connected classifier: rectifier hidden layers, softmax output,
/// trained by mini-batch gradient descent with momentum on the cross-entropy
/// loss. Weight initialization and batch order come from a splitmix64 stream
/// seeded by the config, so identical seed and data give identical parameters.
class FeedforwardNet final : public Classifier {
public:
    explicit FeedforwardNet(NetConfig cfg = {}) : cfg_(std::move(cfg)) {
        if (cfg_.batch_size < 1) throw std::invalid_argument("NetConfig: batch_size must be >= 1");
        if (cfg_.epochs < 0) throw std::invalid_argument("NetConfig: epochs must be >= 0");
        if (!(cfg_.feature_scale > 0.0))
            throw std::invalid_argument("NetConfig: feature_scale must be positive");
        for (int h : cfg_.hidden_sizes)
            if (h < 1) throw std::invalid_argument("NetConfig: hidden sizes must be >= 1");
    }

    void fit(const Dataset& train) override {
        layer_sizes_.clear();
        layer_sizes_.push_back(train.feature_dim());
        layer_sizes_.insert(layer_sizes_.end(), cfg_.hidden_sizes.begin(), cfg_.hidden_sizes.end());
        layer_sizes_.push_back(train.num_classes());

        SplitMix64 rng(cfg_.seed);
        init_parameters(rng);
        fitted_ = true;
        epoch_losses_.clear();

        std::vector<std::vector<double>> vel_w, vel_b;
        zero_like(vel_w, vel_b);
        std::vector<std::vector<double>> grad_w, grad_b;
        zero_like(grad_w, grad_b);

        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), std::size_t{0});

        Workspace ws = make_workspace();
        const std::size_t n = train.size();

        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            rng.shuffle(order);
            double epoch_loss = 0.0;
            for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg_.batch_size)) {
                const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg_.batch_size));
                for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0);
                for (auto& g : grad_b) std::fill(g.begin(), g.end(), 0.0);

                for (std::size_t j = start; j < stop; ++j) {
                    const std::size_t i = order[j];
                    epoch_loss += backprop(train.row(i), train.label(i), ws, grad_w, grad_b);
                }

                const double inv = 1.0 / static_cast<double>(stop - start);
                for (std::size_t l = 0; l < weights_.size(); ++l) {
                    for (std::size_t p = 0; p < weights_[l].size(); ++p) {
                        vel_w[l][p] = cfg_.momentum * vel_w[l][p] + grad_w[l][p] * inv;
                        weights_[l][p] -= cfg_.learning_rate * vel_w[l][p];
                    }
                    for (std::size_t p = 0; p < biases_[l].size(); ++p) {
                        vel_b[l][p] = cfg_.momentum * vel_b[l][p] + grad_b[l][p] * inv;
                        biases_[l][p] -= cfg_.learning_rate * vel_b[l][p];
                    }
                }
            }
            epoch_loss /= static_cast<double>(n);
            if (!std::isfinite(epoch_loss))
                throw std::runtime_error("FeedforwardNet: non-finite training loss at epoch " +
                                         std::to_string(epoch) + " (learning rate too high?)");
            epoch_losses_.push_back(epoch_loss);
        }
    }

    Scored evaluate(std::span<const double> x) const override {
        const std::vector<double> p = probabilities(x);
        const int label = detail::argmax(p);
        return Scored{label, p[static_cast<std::size_t>(label)]};
    }

    /// Softmax output distribution; sums to 1 within 1e-6 for any input.
    std::vector<double> probabilities(std::span<const double> x) const {
        require_fitted();
        if (static_cast<int>(x.size()) != layer_sizes_.front())
            throw std::invalid_argument("FeedforwardNet: feature vector has wrong length");
        std::vector<double> cur(x.begin(), x.end());
        for (double& v : cur) v /= cfg_.feature_scale;
        std::vector<double> next;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            affine(l, cur, next);
            if (l + 1 < weights_.size())
                for (double& v : next) v = v > 0.0 ? v : 0.0;
            cur.swap(next);
        }
        detail::stable_softmax_inplace(cur);
        return cur;
    }

    bool fitted() const override { return fitted_; }
    const NetConfig& config() const { return cfg_; }
    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    /// Mean cross-entropy per epoch during the last fit.
    const std::vector<double>& epoch_losses() const { return epoch_losses_; }

    /// All parameters as one vector (per layer: row-major weights, then
    /// biases). Together with set_parameters this backs serialization and the
    /// finite-difference gradient check.
    std::vector<double> flatten_parameters() const {
        std::vector<double> out;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            out.insert(out.end(), weights_[l].begin(), weights_[l].end());
            out.insert(out.end(), biases_[l].begin(), biases_[l].end());
        }
        return out;
    }

    void set_parameters(std::span<const double> flat) {
        std::size_t pos = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            for (double& w : weights_[l]) w = flat[pos++];
            for (double& b : biases_[l]) b = flat[pos++];
        }
        if (pos != flat.size())
            throw std::invalid_argument("FeedforwardNet: parameter vector has wrong length");
    }

    /// Mean cross-entropy over the given rows under the current parameters.
    double batch_loss(const Dataset& data, std::span<const std::size_t> idx) const {
        Workspace ws = make_workspace();
        double loss = 0.0;
        for (std::size_t i : idx) {
            forward(data.row(i), ws);
            loss += -std::log(std::max(ws.activations.back()[static_cast<std::size_t>(data.label(i))], 1e-300));
        }
        return loss / static_cast<double>(idx.size());
    }

    /// Analytic gradient of batch_loss, flattened like flatten_parameters().
    std::vector<double> batch_gradient(const Dataset& data, std::span<const std::size_t> idx) const {
        std::vector<std::vector<double>> gw, gb;
        zero_like(gw, gb);
        Workspace ws = make_workspace();
        for (std::size_t i : idx) backprop(data.row(i), data.label(i), ws, gw, gb);
        const double inv = 1.0 / static_cast<double>(idx.size());
        std::vector<double> out;
        for (std::size_t l = 0; l < gw.size(); ++l) {
            for (double g : gw[l]) out.push_back(g * inv);
            for (double g : gb[l]) out.push_back(g * inv);
        }
        return out;
    }

    /// Rebuild a fitted net from serialized parameters.
    static FeedforwardNet from_parameters(NetConfig cfg, std::vector<int> layer_sizes,
                                          std::span<const double> flat) {
        FeedforwardNet net(std::move(cfg));
        if (layer_sizes.size() < 2)
            throw std::invalid_argument("FeedforwardNet: need at least input and output layers");
        net.layer_sizes_ = std::move(layer_sizes);
        net.allocate();
        net.set_parameters(flat);
        net.fitted_ = true;
        return net;
    }

private:
    struct Workspace {
        std::vector<std::vector<double>> activations; // [0] = scaled input
        std::vector<std::vector<double>> preacts;     // z per layer
        std::vector<std::vector<double>> deltas;
    };

    Workspace make_workspace() const {
        Workspace ws;
        ws.activations.resize(layer_sizes_.size());
        for (std::size_t l = 0; l < layer_sizes_.size(); ++l)
            ws.activations[l].resize(static_cast<std::size_t>(layer_sizes_[l]));
        ws.preacts.resize(weights_.size());
        ws.deltas.resize(weights_.size());
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            ws.preacts[l].resize(static_cast<std::size_t>(layer_sizes_[l + 1]));
            ws.deltas[l].resize(static_cast<std::size_t>(layer_sizes_[l + 1]));
        }
        return ws;
    }

    void allocate() {
        weights_.assign(layer_sizes_.size() - 1, {});
        biases_.assign(layer_sizes_.size() - 1, {});
        for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
            weights_[l].assign(static_cast<std::size_t>(layer_sizes_[l + 1]) *
                                   static_cast<std::size_t>(layer_sizes_[l]),
                               0.0);
            biases_[l].assign(static_cast<std::size_t>(layer_sizes_[l + 1]), 0.0);
        }
    }

    void init_parameters(SplitMix64& rng) {
        allocate();
        for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
            const double limit = std::sqrt(6.0 / static_cast<double>(layer_sizes_[l]));
            for (double& w : weights_[l]) w = rng.uniform(-limit, limit);
        }
    }

    void zero_like(std::vector<std::vector<double>>& w, std::vector<std::vector<double>>& b) const {
        w.assign(weights_.size(), {});
        b.assign(biases_.size(), {});
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            w[l].assign(weights_[l].size(), 0.0);
            b[l].assign(biases_[l].size(), 0.0);
        }
    }

    void affine(std::size_t l, const std::vector<double>& in, std::vector<double>& out) const {
        const auto rows = static_cast<std::size_t>(layer_sizes_[l + 1]);
        const auto cols = static_cast<std::size_t>(layer_sizes_[l]);
        out.resize(rows);
        const double* w = weights_[l].data();
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = biases_[l][r];
            const double* row = w + r * cols;
            for (std::size_t c = 0; c < cols; ++c) acc += row[c] * in[c];
            out[r] = acc;
        }
    }

    void forward(std::span<const double> x, Workspace& ws) const {
        auto& a0 = ws.activations[0];
        for (std::size_t c = 0; c < x.size(); ++c) a0[c] = x[c] / cfg_.feature_scale;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            affine(l, ws.activations[l], ws.preacts[l]);
            auto& al = ws.activations[l + 1];
            if (l + 1 < weights_.size()) {
                for (std::size_t r = 0; r < ws.preacts[l].size(); ++r)
                    al[r] = ws.preacts[l][r] > 0.0 ? ws.preacts[l][r] : 0.0;
            } else {
                al = ws.preacts[l];
                detail::stable_softmax_inplace(al);
            }
        }
    }

    // Returns the sample cross-entropy; accumulates parameter gradients.
    double backprop(std::span<const double> x, int y, Workspace& ws,
                    std::vector<std::vector<double>>& grad_w,
                    std::vector<std::vector<double>>& grad_b) const {
        forward(x, ws);
        const auto L = weights_.size();
        const auto& p = ws.activations[L];
        const double loss = -std::log(std::max(p[static_cast<std::size_t>(y)], 1e-300));

        auto& dout = ws.deltas[L - 1];
        for (std::size_t r = 0; r < p.size(); ++r)
            dout[r] = p[r] - (static_cast<int>(r) == y ? 1.0 : 0.0);

        for (std::size_t l = L; l-- > 0;) {
            const auto rows = static_cast<std::size_t>(layer_sizes_[l + 1]);
            const auto cols = static_cast<std::size_t>(layer_sizes_[l]);
            const auto& delta = ws.deltas[l];
            const auto& in = ws.activations[l];
            double* gw = grad_w[l].data();
            for (std::size_t r = 0; r < rows; ++r) {
                const double d = delta[r];
                double* grow = gw + r * cols;
                for (std::size_t c = 0; c < cols; ++c) grow[c] += d * in[c];
                grad_b[l][r] += d;
            }
            if (l > 0) {
                auto& dprev = ws.deltas[l - 1];
                const double* w = weights_[l].data();
                for (std::size_t c = 0; c < cols; ++c) dprev[c] = 0.0;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double d = delta[r];
                    const double* row = w + r * cols;
                    for (std::size_t c = 0; c < cols; ++c) dprev[c] += row[c] * d;
                }
                for (std::size_t c = 0; c < cols; ++c)
                    if (ws.preacts[l - 1][c] <= 0.0) dprev[c] = 0.0;
            }
        }
        return loss;
    }

    NetConfig cfg_;
    std::vector<int> layer_sizes_;
    std::vector<std::vector<double>> weights_; // per layer, row-major (out x in)
    std::vector<std::vector<double>> biases_;
    std::vector<double> epoch_losses_;
    bool fitted_ = false;
};

} // namespace greenai
