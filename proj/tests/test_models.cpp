#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "greenai/bench.hpp"
#include "greenai/decision_tree.hpp"
#include "greenai/feedforward_net.hpp"
#include "greenai/numeric.hpp"
#include "greenai/serialize.hpp"
#include "greenai/softmax_regressor.hpp"

using namespace greenai;

namespace {

const char* kDigitsPath = GREENAI_SOURCE_DIR "/data/digits.csv";

Dataset random_dataset(std::size_t n, int dim, int classes, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> f(n * static_cast<std::size_t>(dim));
    std::vector<int> y(n);
    for (auto& v : f) v = rng.uniform(-4.0, 4.0);
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return Dataset(std::move(f), std::move(y), dim, classes);
}

// independent oracle: weighted Gini of a 1-D split at the given threshold
double weighted_gini_1d(const std::vector<std::pair<double, int>>& data, double threshold,
                        int classes) {
    std::vector<double> sides[2];
    std::map<int, int> counts[2];
    int totals[2] = {0, 0};
    for (const auto& [x, y] : data) {
        const int side = x <= threshold ? 0 : 1;
        ++counts[side][y];
        ++totals[side];
    }
    double out = 0.0;
    for (int s = 0; s < 2; ++s) {
        if (totals[s] == 0) continue;
        double gini = 1.0;
        for (const auto& [cls, c] : counts[s]) {
            (void)cls;
            const double p = static_cast<double>(c) / totals[s];
            gini -= p * p;
        }
        out += gini * totals[s] / static_cast<double>(data.size());
    }
    (void)classes;
    return out;
}

} // namespace

// ------------------------------------------------------------------ tree --

TEST_CASE("tree picks the Gini-optimal threshold on 1-D data") {
    // labels A A B B at x = 0 1 2 3; candidates are the midpoints 0.5 1.5 2.5
    const std::vector<std::pair<double, int>> data = {{0, 0}, {1, 0}, {2, 1}, {3, 1}};
    double best_gini = 1e9, best_threshold = 0.0;
    for (double t : {0.5, 1.5, 2.5}) {
        const double g = weighted_gini_1d(data, t, 2);
        if (g < best_gini) {
            best_gini = g;
            best_threshold = t;
        }
    }
    REQUIRE(best_threshold == 1.5);
    REQUIRE(best_gini == 0.0);

    const Dataset d({0, 1, 2, 3}, {0, 0, 1, 1}, 1, 2);
    DecisionTree tree(1);
    tree.fit(d);
    REQUIRE(tree.nodes().size() == 3);
    const auto& root = tree.nodes()[0];
    CHECK(root.feature == 0);
    CHECK(root.threshold == 1.5);
    CHECK(tree.evaluate(std::vector<double>{0.2}).label == 0);
    CHECK(tree.evaluate(std::vector<double>{2.9}).label == 1);
    CHECK(tree.evaluate(std::vector<double>{0.2}).confidence == 1.0); // pure side
    CHECK(tree.evaluate(std::vector<double>{2.9}).confidence == 1.0);
}

TEST_CASE("tree keeps a pure dataset as a single leaf") {
    const Dataset d({0, 1, 2, 3, 4, 5}, {1, 1, 1, 1, 1, 1}, 1, 3);
    DecisionTree tree(5);
    tree.fit(d);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.depth() == 0);
    const Scored s = tree.evaluate(std::vector<double>{2.5});
    CHECK(s.label == 1);
    CHECK(s.confidence == 1.0);
}

TEST_CASE("leaf ties break toward the lowest class index") {
    // six identical points, classes 0 and 1 three times each: no candidate
    // split exists, so the root stays a {3, 3} leaf
    const Dataset d({5, 5, 5, 5, 5, 5}, {0, 1, 0, 1, 1, 0}, 1, 2);
    DecisionTree tree(5);
    tree.fit(d);
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.nodes()[0].counts == std::vector<std::int64_t>{3, 3});
    const Scored s = tree.evaluate(std::vector<double>{5.0});
    CHECK(s.label == 0);
    CHECK(s.confidence == 0.5);
}

TEST_CASE("tree depth never exceeds max_depth") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const int max_depth = 1 + static_cast<int>(rng.below(6));
        const Dataset d = random_dataset(40 + rng.below(150), 4, 3, rng.next());
        DecisionTree tree(max_depth);
        tree.fit(d);
        CHECK(tree.depth() <= max_depth);
    }
}

TEST_CASE("leaf histograms are exactly reproduced by replaying the training data") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const Dataset d = random_dataset(60 + rng.below(200), 3, 4, rng.next());
        DecisionTree tree(4);
        tree.fit(d);

        std::map<int, std::vector<std::int64_t>> replayed;
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto& h = replayed[tree.leaf_for(d.row(i))];
            h.resize(static_cast<std::size_t>(d.num_classes()), 0);
            ++h[static_cast<std::size_t>(d.label(i))];
        }

        std::size_t leaves = 0;
        for (int n = 0; n < static_cast<int>(tree.nodes().size()); ++n) {
            if (!tree.nodes()[static_cast<std::size_t>(n)].is_leaf()) continue;
            ++leaves;
            REQUIRE(replayed.count(n) == 1);
            CHECK(tree.nodes()[static_cast<std::size_t>(n)].counts == replayed[n]);
        }
        CHECK(leaves == replayed.size());
    }
}

TEST_CASE("tree fit is deterministic") {
    const Dataset d = random_dataset(200, 5, 3, 41);
    DecisionTree a(4), b(4);
    a.fit(d);
    b.fit(d);
    REQUIRE(a.nodes().size() == b.nodes().size());
    for (std::size_t i = 0; i < a.nodes().size(); ++i) {
        CHECK(a.nodes()[i].feature == b.nodes()[i].feature);
        CHECK(a.nodes()[i].threshold == b.nodes()[i].threshold);
        CHECK(a.nodes()[i].counts == b.nodes()[i].counts);
    }
}

TEST_CASE("tree rejects bad input") {
    CHECK_THROWS_AS(DecisionTree(0), std::invalid_argument);
    DecisionTree tree(3);
    CHECK_THROWS_AS(tree.evaluate(std::vector<double>{1.0}), std::logic_error); // unfitted
    tree.fit(random_dataset(30, 2, 2, 3));
    CHECK_THROWS_AS(tree.evaluate(std::vector<double>{1.0}), std::invalid_argument); // wrong dim
}

TEST_CASE("depth-5 tree lands near the reference digits accuracy") {
    const Dataset digits = load_digits_csv(kDigitsPath);
    const DatasetSplit parts = split(digits, SplitSpec{});
    DecisionTree tree(5);
    tree.fit(parts.train);
    std::vector<int> pred(parts.test.size());
    for (std::size_t i = 0; i < parts.test.size(); ++i) pred[i] = tree.predict(parts.test.row(i));
    const double acc = accuracy(pred, parts.test.labels());
    CHECK(acc >= 0.63);
    CHECK(acc <= 0.83);
}

// ----------------------------------------------------------------- net ----

TEST_CASE("stable softmax matches a naive high-precision reference") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(12);
        std::vector<double> logits(n);
        const double scale = trial % 3 == 0 ? 1000.0 : (trial % 3 == 1 ? 1.0 : 1e-3);
        for (auto& v : logits) v = rng.uniform(-scale, scale);

        const std::vector<double> p = detail::stable_softmax(logits);

        // reference: naive exponentiation in long double
        long double m = logits[0];
        for (double v : logits) m = std::max<long double>(m, v);
        long double sum = 0.0L;
        std::vector<long double> ref(n);
        for (std::size_t i = 0; i < n; ++i) {
            ref[i] = std::exp(static_cast<long double>(logits[i]) - m);
            sum += ref[i];
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(p[i] - static_cast<double>(ref[i] / sum)) < 1e-9);
            total += p[i];
        }
        CHECK(std::abs(total - 1.0) < 1e-6);
    }
}

TEST_CASE("softmax boundary cases") {
    std::vector<double> uniform(10, 3.25);
    const auto p = detail::stable_softmax(uniform);
    for (double v : p) CHECK(v == 0.1);

    std::vector<double> saturated{1000.0, 0.0, 0.0};
    const auto q = detail::stable_softmax(saturated);
    CHECK(q[0] > 1.0 - 1e-12);
    CHECK(std::isfinite(q[0]));
}

TEST_CASE("net analytic gradient matches central finite differences") {
    // 2-3-2 net: 17 parameters, small enough for a dense finite-difference scan
    NetConfig cfg;
    cfg.hidden_sizes = {3};
    cfg.epochs = 0;
    cfg.seed = 11;
    FeedforwardNet net(cfg);
    const Dataset d = random_dataset(8, 2, 2, 29);
    net.fit(d); // random init only
    REQUIRE(net.flatten_parameters().size() == 17);

    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::vector<double> analytic = net.batch_gradient(d, idx);
    std::vector<double> theta = net.flatten_parameters();

    const double h = 1e-5;
    double num_norm = 0.0, diff_norm = 0.0;
    for (std::size_t p = 0; p < theta.size(); ++p) {
        const double keep = theta[p];
        theta[p] = keep + h;
        net.set_parameters(theta);
        const double up = net.batch_loss(d, idx);
        theta[p] = keep - h;
        net.set_parameters(theta);
        const double down = net.batch_loss(d, idx);
        theta[p] = keep;
        const double numeric = (up - down) / (2.0 * h);
        diff_norm += (analytic[p] - numeric) * (analytic[p] - numeric);
        num_norm += numeric * numeric;
        CHECK(std::abs(analytic[p] - numeric) <
              1e-4 * std::max({1.0, std::abs(analytic[p]), std::abs(numeric)}));
    }
    net.set_parameters(theta);
    CHECK(std::sqrt(diff_norm) < 1e-4 * std::max(1.0, std::sqrt(num_norm)));
}

TEST_CASE("net learns xor") {
    const Dataset d({0, 0, 0, 1, 1, 0, 1, 1}, {0, 1, 1, 0}, 2, 2);
    NetConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.learning_rate = 0.5;
    cfg.batch_size = 4;
    cfg.epochs = 2000;
    cfg.seed = 3;
    FeedforwardNet net(cfg);
    net.fit(d);

    std::vector<int> pred(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) pred[i] = net.predict(d.row(i));
    CHECK(accuracy(pred, d.labels()) == 1.0);

    const auto& losses = net.epoch_losses();
    REQUIRE(losses.size() == 2000);
    CHECK(losses.back() < losses.front());
    // loss trend: mean over the last 100 epochs below the first 100
    const double head = std::accumulate(losses.begin(), losses.begin() + 100, 0.0) / 100.0;
    const double tail = std::accumulate(losses.end() - 100, losses.end(), 0.0) / 100.0;
    CHECK(tail < head);
}

TEST_CASE("zero-epoch net predicts at chance level on balanced data") {
    SplitMix64 rng(13);
    const std::size_t n = 1000;
    const int classes = 4;
    std::vector<double> f(n * 3);
    std::vector<int> y(n);
    for (auto& v : f) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes); // balanced
    const Dataset d(std::move(f), std::move(y), 3, classes);

    NetConfig cfg;
    cfg.hidden_sizes = {16, 8};
    cfg.epochs = 0;
    FeedforwardNet net(cfg);
    net.fit(d);
    std::vector<int> pred(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) pred[i] = net.predict(d.row(i));
    const double acc = accuracy(pred, d.labels());
    CHECK(acc > 0.10); // chance is 0.25; labels are independent of features
    CHECK(acc < 0.40);
}

TEST_CASE("all-zero parameters give exactly uniform confidence") {
    NetConfig cfg;
    cfg.hidden_sizes = {4};
    FeedforwardNet proto(cfg);
    const Dataset d = random_dataset(12, 3, 10, 51);
    proto.fit(d);
    const std::vector<double> zeros(proto.flatten_parameters().size(), 0.0);
    const FeedforwardNet net =
        FeedforwardNet::from_parameters(cfg, proto.layer_sizes(), zeros);
    const Scored s = net.evaluate(d.row(0));
    CHECK(s.label == 0); // argmax tie resolves to the lowest index
    CHECK(s.confidence == 1.0 / 10.0);
}

TEST_CASE("net forward pass matches an independent reference implementation") {
    NetConfig cfg;
    cfg.hidden_sizes = {4};
    cfg.epochs = 0;
    cfg.seed = 99;
    cfg.feature_scale = 2.0;
    FeedforwardNet net(cfg);
    const Dataset d = random_dataset(6, 3, 3, 61);
    net.fit(d);

    for (std::size_t i = 0; i < d.size(); ++i) {
        // hand-rolled forward over the exposed parameters
        std::vector<long double> h;
        for (double v : d.row(i)) h.push_back(static_cast<long double>(v) / cfg.feature_scale);
        for (std::size_t l = 0; l < net.weights().size(); ++l) {
            const auto rows = static_cast<std::size_t>(net.layer_sizes()[l + 1]);
            const auto cols = static_cast<std::size_t>(net.layer_sizes()[l]);
            std::vector<long double> next(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                long double acc = net.biases()[l][r];
                for (std::size_t c = 0; c < cols; ++c)
                    acc += static_cast<long double>(net.weights()[l][r * cols + c]) * h[c];
                next[r] = l + 1 < net.weights().size() ? std::max<long double>(acc, 0.0L) : acc;
            }
            h = std::move(next);
        }
        long double m = h[0], sum = 0.0L;
        for (auto v : h) m = std::max(m, v);
        for (auto& v : h) {
            v = std::exp(v - m);
            sum += v;
        }
        const std::vector<double> p = net.probabilities(d.row(i));
        for (std::size_t c = 0; c < p.size(); ++c)
            CHECK(std::abs(p[c] - static_cast<double>(h[c] / sum)) < 1e-9);
    }
}

TEST_CASE("net training is deterministic given the seed") {
    const Dataset d = random_dataset(80, 4, 3, 71);
    NetConfig cfg;
    cfg.hidden_sizes = {8, 6};
    cfg.epochs = 30;
    cfg.seed = 5;
    FeedforwardNet a(cfg), b(cfg);
    a.fit(d);
    b.fit(d);
    CHECK(a.flatten_parameters() == b.flatten_parameters()); // byte-for-byte
    CHECK(a.epoch_losses() == b.epoch_losses());

    cfg.seed = 6;
    FeedforwardNet c(cfg);
    c.fit(d);
    CHECK(a.flatten_parameters() != c.flatten_parameters());
}

TEST_CASE("divergent learning rate raises a non-finite loss error") {
    const Dataset d = random_dataset(40, 3, 2, 81);
    NetConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.learning_rate = 1e9;
    cfg.epochs = 50;
    FeedforwardNet net(cfg);
    CHECK_THROWS_AS(net.fit(d), std::runtime_error);
}

// ------------------------------------------------------------- softmax ----

TEST_CASE("balanced class weights follow n / (k * n_c)") {
    std::vector<double> f(100);
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        f[i] = static_cast<double>(i);
        y[i] = i < 90 ? 0 : 1;
    }
    SoftmaxConfig cfg;
    cfg.epochs = 1;
    SoftmaxRegressor m(cfg, /*balanced=*/true);
    m.fit(Dataset(std::move(f), std::move(y), 1, 2));
    REQUIRE(m.class_weights().size() == 2);
    CHECK_THAT(m.class_weights()[0], Catch::Matchers::WithinRel(100.0 / (2.0 * 90.0), 1e-12));
    CHECK_THAT(m.class_weights()[1], Catch::Matchers::WithinRel(100.0 / (2.0 * 10.0), 1e-12));
}

TEST_CASE("balanced weighting is a no-op on uniformly distributed classes") {
    const Dataset d = [&] {
        std::vector<double> f;
        std::vector<int> y;
        SplitMix64 rng(15);
        for (int i = 0; i < 120; ++i) {
            f.push_back(rng.uniform(-2, 2));
            f.push_back(rng.uniform(-2, 2));
            y.push_back(i % 3);
        }
        return Dataset(std::move(f), std::move(y), 2, 3);
    }();
    SoftmaxConfig cfg;
    cfg.epochs = 40;
    SoftmaxRegressor balanced(cfg, true), flat(cfg, false);
    balanced.fit(d);
    flat.fit(d);
    CHECK(balanced.class_weights() == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(balanced.weights() == flat.weights()); // identical parameters, exactly
    CHECK(balanced.bias() == flat.bias());
}

TEST_CASE("softmax regressor separates linearly separable blobs") {
    std::vector<double> f;
    std::vector<int> y;
    SplitMix64 rng(19);
    for (int i = 0; i < 100; ++i) {
        const int label = i % 2;
        f.push_back((label == 0 ? -2.0 : 2.0) + rng.uniform(-0.9, 0.9));
        f.push_back(rng.uniform(-1.0, 1.0));
        y.push_back(label);
    }
    const Dataset d(std::move(f), std::move(y), 2, 2);

    // separability oracle: a brute-force scan over thresholds on the first
    // feature must find a perfect separator
    bool separable = false;
    for (double t = -3.0; t <= 3.0; t += 0.01) {
        bool ok = true;
        for (std::size_t i = 0; i < d.size() && ok; ++i)
            ok = (d.row(i)[0] <= t) == (d.label(i) == 0);
        if (ok) {
            separable = true;
            break;
        }
    }
    REQUIRE(separable);

    SoftmaxConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 500;
    SoftmaxRegressor m(cfg, true);
    m.fit(d);
    std::vector<int> pred(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) pred[i] = m.predict(d.row(i));
    CHECK(accuracy(pred, d.labels()) == 1.0);

    const auto p = m.probabilities(d.row(0));
    CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-6);
}

TEST_CASE("softmax regressor training is deterministic") {
    const Dataset d = random_dataset(90, 3, 3, 91);
    SoftmaxConfig cfg;
    cfg.epochs = 60;
    SoftmaxRegressor a(cfg), b(cfg);
    a.fit(d);
    b.fit(d);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
}

// --------------------------------------------------------- serialization --

TEST_CASE("models survive a json round trip with identical predictions") {
    const Dataset train = random_dataset(150, 4, 3, 101);
    const Dataset probe = random_dataset(60, 4, 3, 102);

    SECTION("decision tree") {
        DecisionTree tree(4);
        tree.fit(train);
        const nlohmann::json j = model_to_json(tree);
        CHECK(j.at("kind") == "decision_tree");
        CHECK(j.at("schema_version") == kModelSchemaVersion);
        const DecisionTree back = tree_from_json(nlohmann::json::parse(j.dump()));
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const Scored x = tree.evaluate(probe.row(i));
            const Scored y = back.evaluate(probe.row(i));
            CHECK(x.label == y.label);
            CHECK(x.confidence == y.confidence);
        }
    }

    SECTION("feedforward net") {
        NetConfig cfg;
        cfg.hidden_sizes = {8, 6};
        cfg.epochs = 25;
        FeedforwardNet net(cfg);
        net.fit(train);
        const nlohmann::json j = model_to_json(net);
        CHECK(j.at("kind") == "feedforward_net");
        const FeedforwardNet back = net_from_json(nlohmann::json::parse(j.dump()));
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const Scored x = net.evaluate(probe.row(i));
            const Scored y = back.evaluate(probe.row(i));
            CHECK(x.label == y.label);
            CHECK(x.confidence == y.confidence); // doubles round-trip exactly
        }
    }

    SECTION("softmax regressor") {
        SoftmaxConfig cfg;
        cfg.epochs = 50;
        SoftmaxRegressor m(cfg, true);
        m.fit(train);
        const nlohmann::json j = model_to_json(m);
        CHECK(j.at("kind") == "softmax_regressor");
        const SoftmaxRegressor back = softmax_from_json(nlohmann::json::parse(j.dump()));
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const Scored x = m.evaluate(probe.row(i));
            const Scored y = back.evaluate(probe.row(i));
            CHECK(x.label == y.label);
            CHECK(x.confidence == y.confidence);
        }
    }

    SECTION("polymorphic factory") {
        DecisionTree tree(3);
        tree.fit(train);
        const auto loaded = model_from_json(model_to_json(tree));
        CHECK(loaded->predict(probe.row(0)) == tree.predict(probe.row(0)));
        nlohmann::json bogus = model_to_json(tree);
        bogus["kind"] = "mystery";
        CHECK_THROWS_AS(model_from_json(bogus), std::invalid_argument);
        nlohmann::json wrong_version = model_to_json(tree);
        wrong_version["schema_version"] = 99;
        CHECK_THROWS_AS(tree_from_json(wrong_version), std::invalid_argument);
    }
}
