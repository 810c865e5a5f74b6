#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "greenai/cascade.hpp"
#include "greenai/classifier.hpp"
#include "greenai/dataset.hpp"
#include "greenai/energy.hpp"
#include "greenai/softmax_regressor.hpp"

namespace greenai {

/// Per-instance target model indices (1-based): the cheapest model that
/// classifies the instance correctly, or 1 when no model does.
using OracleLabels = std::vector<int>;

/// Label every instance with min{ i : model i is correct }, falling back to
/// index 1 (the cheapest model) when every model is wrong.
inline OracleLabels build_oracle_labels(const ModelChain& chain, const Dataset& data) {
    chain.require_all_fitted();
    OracleLabels labels;
    labels.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        int target = 1;
        for (int m = 1; m <= chain.size(); ++m) {
            if (chain.model(m).predict(data.row(i)) == data.label(i)) {
                target = m;
                break;
            }
        }
        labels.push_back(target);
    }
    return labels;
}

/// A learned approximation of the oracle: maps an instance to the chain index
/// (1-based) it should be dispatched to. Degenerates to a constant function
/// when the oracle labels contained a single class.
class RouterModel {
public:
    RouterModel(ModelChain chain, std::shared_ptr<const Classifier> learner)
        : chain_(std::move(chain)), learner_(std::move(learner)) {
        if (!learner_) throw std::invalid_argument("RouterModel: null learner");
    }

    RouterModel(ModelChain chain, int constant_index)
        : chain_(std::move(chain)), constant_index_(constant_index) {
        if (constant_index_ < 1 || constant_index_ > chain_.size())
            throw std::invalid_argument("RouterModel: constant index outside chain");
    }

    int route(std::span<const double> x) const {
        if (constant_index_ != 0) return constant_index_;
        const int index = learner_->predict(x) + 1;
        if (index < 1 || index > chain_.size())
            throw std::logic_error("RouterModel: learner produced an index outside 1..k");
        return index;
    }

    const ModelChain& chain() const { return chain_; }
    bool is_constant() const { return constant_index_ != 0; }
    int constant_index() const { return constant_index_; }
    const Classifier* learner() const { return learner_.get(); }

private:
    ModelChain chain_;
    std::shared_ptr<const Classifier> learner_;
    int constant_index_ = 0;
};

/// Fit a supplied learner on (x, oracle(x) - 1) pairs built from the
/// validation set. The validation set must be disjoint from the chain models'
/// training data for the comparison to be fair.
inline RouterModel train_router_with(const ModelChain& chain, const Dataset& val,
                                     const std::shared_ptr<Classifier>& learner) {
    if (!learner) throw std::invalid_argument("train_router: null learner");
    const OracleLabels oracle = build_oracle_labels(chain, val);

    const std::set<int> distinct(oracle.begin(), oracle.end());
    if (distinct.size() == 1) return RouterModel(chain, *distinct.begin());

    std::vector<int> classes(oracle.size());
    std::transform(oracle.begin(), oracle.end(), classes.begin(), [](int t) { return t - 1; });
    Dataset routing_set(val.features(), std::move(classes), val.feature_dim(), chain.size());
    learner->fit(routing_set);
    return RouterModel(chain, learner);
}

/// Default router: balanced-class-weight softmax regression over {1..k}.
inline RouterModel train_router(const ModelChain& chain, const Dataset& val,
                                const SoftmaxConfig& learner_config = {}) {
    return train_router_with(chain, val,
                             std::make_shared<SoftmaxRegressor>(learner_config, /*balanced=*/true));
}

/// Single-dispatch inference: ask the router for an index, evaluate only that
/// model. selection_time covers the router's own inference.
inline CascadeOutcome route_predict(const RouterModel& router, std::span<const double> x) {
    router.chain().require_all_fitted();

    CascadeOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const int index = router.route(x);
    out.selection_time = std::chrono::steady_clock::now() - t0;

    const Scored scored = router.chain().model(index).evaluate(x);
    out.prediction = Prediction{scored.label, scored.confidence, index};
    out.models_invoked = {index};
    return out;
}

/// One full routed pass over a test set. The router sweep runs first and is
/// timed as selection overhead; each chain model then evaluates exactly the
/// instances dispatched to it. Results match route_predict applied per
/// instance.
inline RunMetrics route_evaluate(const RouterModel& router, const Dataset& test,
                                 EnergyMeter& meter) {
    router.chain().require_all_fitted();
    const int k = router.chain().size();
    const std::size_t n = test.size();

    detail::PassAccumulator acc(n, k);
    std::vector<int> decision(n);

    meter.begin();
    const auto pass_start = std::chrono::steady_clock::now();

    const auto sel_start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < n; ++i) decision[i] = router.route(test.row(i));
    acc.selection += std::chrono::steady_clock::now() - sel_start;
    meter.record_router_invocation(static_cast<std::int64_t>(n));

    for (int m = 1; m <= k; ++m) {
        const Classifier& model = router.chain().model(m);
        std::int64_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (decision[i] != m) continue;
            acc.predicted[i] = model.evaluate(test.row(i)).label;
            ++count;
        }
        acc.accepted_count[static_cast<std::size_t>(m - 1)] = count;
        if (count > 0) meter.record_model_invocation(m, count);
    }

    const Milliseconds total = std::chrono::steady_clock::now() - pass_start;
    const EnergySample sample = meter.end();
    return acc.finish(test, total, sample);
}

/// DIAGNOSTIC ONLY: route by the oracle built on the evaluation set itself.
/// This reads the true labels of `test`, so it is an upper bound for
/// experiments, never a deployable router. Its accuracy equals the fraction
/// of instances at least one chain model classifies correctly.
inline RunMetrics oracle_route_evaluate(const ModelChain& chain, const Dataset& test,
                                        EnergyMeter& meter) {
    chain.require_all_fitted();
    const OracleLabels oracle = build_oracle_labels(chain, test);
    const std::size_t n = test.size();

    detail::PassAccumulator acc(n, chain.size());
    meter.begin();
    const auto pass_start = std::chrono::steady_clock::now();
    meter.record_router_invocation(static_cast<std::int64_t>(n));
    for (int m = 1; m <= chain.size(); ++m) {
        std::int64_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (oracle[i] != m) continue;
            acc.predicted[i] = chain.model(m).evaluate(test.row(i)).label;
            ++count;
        }
        acc.accepted_count[static_cast<std::size_t>(m - 1)] = count;
        if (count > 0) meter.record_model_invocation(m, count);
    }
    const Milliseconds total = std::chrono::steady_clock::now() - pass_start;
    const EnergySample sample = meter.end();
    return acc.finish(test, total, sample);
}

/// Fraction of instances correctly classified by at least one chain model.
inline double oracle_coverage(const ModelChain& chain, const Dataset& data) {
    chain.require_all_fitted();
    std::size_t covered = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int m = 1; m <= chain.size(); ++m) {
            if (chain.model(m).predict(data.row(i)) == data.label(i)) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(data.size());
}

} // namespace greenai
