// Minimal library walkthrough: build a two-model chain on synthetic blobs,
// cascade with a confidence threshold, and compare against a learned router.

#include <cstdio>
#include <memory>
#include <vector>

#include "greenai/greenai.hpp"

using namespace greenai;

namespace {

// two noisy Gaussian-ish blobs per class in 2-D
Dataset make_blobs(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.below(3));
        const double cx = label == 0 ? -2.0 : (label == 1 ? 0.0 : 2.0);
        x.push_back(cx + rng.uniform(-1.8, 1.8));
        x.push_back(0.7 * cx + rng.uniform(-1.8, 1.8));
        y.push_back(label);
    }
    return Dataset(std::move(x), std::move(y), 2, 3);
}

} // namespace

int main() {
    const Dataset data = make_blobs(1200, 7);
    const DatasetSplit parts = split(data, SplitSpec{0.6, 0.2, 0.2, 7});

    auto cheap = std::make_shared<DecisionTree>(2);
    cheap->fit(parts.train);

    NetConfig net_cfg;
    net_cfg.hidden_sizes = {16, 8};
    net_cfg.epochs = 120;
    auto accurate = std::make_shared<FeedforwardNet>(net_cfg);
    accurate->fit(parts.train);

    const ModelChain chain({cheap, accurate}, {1.0, 50.0});
    ModeledMeter meter(CostModel{{1.0, 50.0}, 1.0});

    const RunMetrics cascade = cascade_evaluate(chain, CascadeConfig{0.2}, parts.test, meter);
    std::printf("cascade:  accuracy %.3f, fraction handled by the cheap model %.2f, "
                "modeled energy %.1f units\n",
                cascade.accuracy, cascade.fraction_per_model[0], cascade.total_energy_uwh);

    const RouterModel router = train_router(chain, parts.val);
    const RunMetrics routed = route_evaluate(router, parts.test, meter);
    std::printf("routing:  accuracy %.3f, fraction routed to the cheap model %.2f, "
                "modeled energy %.1f units\n",
                routed.accuracy, routed.fraction_per_model[0], routed.total_energy_uwh);

    const RunMetrics expensive_only = single_model_evaluate(chain, 2, parts.test, meter);
    std::printf("expensive-only baseline energy %.1f units\n", expensive_only.total_energy_uwh);
    return 0;
}
