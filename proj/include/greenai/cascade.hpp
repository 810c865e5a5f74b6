#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "greenai/classifier.hpp"
#include "greenai/dataset.hpp"
#include "greenai/energy.hpp"
#include "greenai/metrics.hpp"

namespace greenai {

/// Ordered sequence of k >= 2 fitted classifiers with non-decreasing declared
/// per-prediction energy costs; model 1 is the cheapest. Model indices are
/// 1-based everywhere in the public API.
class ModelChain {
public:
    ModelChain(std::vector<std::shared_ptr<const Classifier>> models,
               std::vector<double> declared_costs)
        : models_(std::move(models)), costs_(std::move(declared_costs)) {
        if (models_.size() < 2)
            throw std::invalid_argument("ModelChain: need at least 2 models");
        if (costs_.size() != models_.size())
            throw std::invalid_argument("ModelChain: one declared cost per model required");
        for (std::size_t i = 0; i < costs_.size(); ++i) {
            if (costs_[i] < 0.0)
                throw std::invalid_argument("ModelChain: negative declared cost");
            if (i > 0 && costs_[i] < costs_[i - 1])
                throw std::invalid_argument(
                    "ModelChain: declared costs must be non-decreasing with index");
            if (!models_[i])
                throw std::invalid_argument("ModelChain: null model");
        }
    }

    int size() const { return static_cast<int>(models_.size()); }

    const Classifier& model(int index) const { // 1-based
        if (index < 1 || index > size())
            throw std::out_of_range("ModelChain: model index " + std::to_string(index));
        return *models_[static_cast<std::size_t>(index - 1)];
    }

    double declared_cost(int index) const { return costs_[static_cast<std::size_t>(index - 1)]; }
    const std::vector<double>& declared_costs() const { return costs_; }

    void require_all_fitted() const {
        for (int i = 1; i <= size(); ++i)
            if (!model(i).fitted())
                throw std::logic_error("ModelChain: model " + std::to_string(i) + " is not fitted");
    }

private:
    std::vector<std::shared_ptr<const Classifier>> models_;
    std::vector<double> costs_;
};

/// epsilon in [0, 1]; a prediction is accepted when confidence >= 1 - epsilon.
struct CascadeConfig {
    double epsilon = 0.2;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw std::invalid_argument("CascadeConfig: epsilon must lie in [0, 1]");
    }
};

/// Per-instance record of a dynamic-selection decision. models_invoked are
/// the 1-based chain indices actually evaluated; for cascading this is always
/// the prefix 1..i ending at the model that produced the prediction.
struct CascadeOutcome {
    Prediction prediction;
    std::vector<int> models_invoked;
    std::chrono::nanoseconds selection_time{0};
};

/// Escalate through the chain: evaluate models in cost order, accept the
/// first whose confidence clears 1 - epsilon, fall back to the last model
/// unconditionally. Each model is evaluated at most once and nothing past the
/// accepting model runs. selection_time covers only the threshold checks.
inline CascadeOutcome cascade_predict(const ModelChain& chain, const CascadeConfig& config,
                                      std::span<const double> x) {
    config.validate();
    chain.require_all_fitted();
    const double threshold = 1.0 - config.epsilon;
    const int k = chain.size();

    CascadeOutcome out;
    out.models_invoked.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        const Scored scored = chain.model(i).evaluate(x);
        out.models_invoked.push_back(i);
        bool accept = i == k; // the last model is the unconditional fallback
        if (i < k) {
            const auto t0 = std::chrono::steady_clock::now();
            accept = scored.confidence >= threshold;
            out.selection_time += std::chrono::steady_clock::now() - t0;
        }
        if (accept) {
            out.prediction = Prediction{scored.label, scored.confidence, i};
            break;
        }
    }
    return out;
}

namespace detail {

/// Per-pass bookkeeping shared by the evaluation drivers.
struct PassAccumulator {
    std::vector<int> predicted;
    std::vector<std::int64_t> accepted_count; // by accepting model, 0-based
    std::chrono::nanoseconds selection{0};

    PassAccumulator(std::size_t n, int k)
        : predicted(n, -1), accepted_count(static_cast<std::size_t>(k), 0) {}

    RunMetrics finish(const Dataset& test, Milliseconds total, const EnergySample& sample) const {
        RunMetrics m;
        m.accuracy = greenai::accuracy(predicted, test.labels());
        m.total_time = total;
        m.total_energy_uwh = sample.energy_uwh;
        m.selection_overhead = std::chrono::duration_cast<Milliseconds>(selection);
        m.fraction_per_model.resize(accepted_count.size());
        for (std::size_t i = 0; i < accepted_count.size(); ++i)
            m.fraction_per_model[i] =
                static_cast<double>(accepted_count[i]) / static_cast<double>(test.size());
        m.validate();
        return m;
    }
};

} // namespace detail

/// One full pass of the cascade over a test set, with energy measured by the
/// supplied meter around the pass.
///
/// Instances are processed stage by stage: stage i evaluates model i on every
/// instance still undecided, then a single selection sweep applies the
/// threshold. This produces exactly the same predictions, invocation sets and
/// fractions as calling cascade_predict per instance (each model still runs
/// at most once per instance, and never after an accepted prediction) while
/// keeping the selection-overhead measurement outside the inference windows.
inline RunMetrics cascade_evaluate(const ModelChain& chain, const CascadeConfig& config,
                                   const Dataset& test, EnergyMeter& meter) {
    config.validate();
    chain.require_all_fitted();
    const double threshold = 1.0 - config.epsilon;
    const int k = chain.size();
    const std::size_t n = test.size();

    detail::PassAccumulator acc(n, k);
    std::vector<std::uint32_t> pending(n);
    for (std::size_t i = 0; i < n; ++i) pending[i] = static_cast<std::uint32_t>(i);
    std::vector<Scored> scored(n);
    std::vector<std::uint32_t> still_pending;
    still_pending.reserve(n);

    meter.begin();
    const auto pass_start = std::chrono::steady_clock::now();
    for (int stage = 1; stage <= k && !pending.empty(); ++stage) {
        const Classifier& model = chain.model(stage);
        for (std::uint32_t idx : pending) scored[idx] = model.evaluate(test.row(idx));
        meter.record_model_invocation(stage, static_cast<std::int64_t>(pending.size()));

        // selection sweep: pure threshold comparisons and dispatch bookkeeping
        const auto sel_start = std::chrono::steady_clock::now();
        still_pending.clear();
        for (std::uint32_t idx : pending) {
            if (stage == k || scored[idx].confidence >= threshold) {
                acc.predicted[idx] = scored[idx].label;
                ++acc.accepted_count[static_cast<std::size_t>(stage - 1)];
            } else {
                still_pending.push_back(idx);
            }
        }
        acc.selection += std::chrono::steady_clock::now() - sel_start;
        pending.swap(still_pending);
    }
    const Milliseconds total = std::chrono::steady_clock::now() - pass_start;
    const EnergySample sample = meter.end();

    return acc.finish(test, total, sample);
}

} // namespace greenai
