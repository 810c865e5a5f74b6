#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "greenai/bench.hpp"

using namespace greenai;

namespace {

const char* kDigitsPath = GREENAI_SOURCE_DIR "/data/digits.csv";

std::string write_temp(const std::string& name, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "greenai_bench_test";
    fs::create_directories(dir);
    const std::string path = (dir / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

std::string valid_line(int label = 7) {
    std::string line;
    for (int i = 0; i < 64; ++i) line += std::to_string(i % 17) + ",";
    return line + std::to_string(label);
}

/// Cheap config for smoke tests: tiny network, few repeats.
ExperimentConfig reduced_config() {
    ExperimentConfig cfg;
    cfg.dataset_path = kDigitsPath;
    cfg.repeats = 2;
    cfg.meter = MeterChoice::modeled;
    cfg.net.hidden_sizes = {32, 16};
    cfg.net.epochs = 25;
    return cfg;
}

std::vector<ReportRow> fabricated_rows() {
    return {
        ReportRow{"(G) Decision Tree", 1.0, 0.0, 0.73, 0.13, 0.13, EnergySource::modeled},
        ReportRow{"(A) Neural Network", 0.0, 0.0, 0.98, 37.44, 40.80, EnergySource::modeled},
        ReportRow{"(C) Cascading", 0.65, 0.22, 0.92, 29.48, 32.12, EnergySource::modeled},
        ReportRow{"(R) Routing", 0.62, 0.19, 0.88, 33.13, 30.83, EnergySource::modeled},
    };
}

class RecordingClassifier final : public Classifier {
public:
    explicit RecordingClassifier(std::shared_ptr<const Classifier> inner)
        : inner_(std::move(inner)) {}
    void fit(const Dataset&) override { throw std::logic_error("wrapped model is pre-fitted"); }
    Scored evaluate(std::span<const double> x) const override {
        seen_.emplace_back(x.begin(), x.end());
        return inner_->evaluate(x);
    }
    bool fitted() const override { return inner_->fitted(); }
    const std::vector<std::vector<double>>& seen() const { return seen_; }

private:
    std::shared_ptr<const Classifier> inner_;
    mutable std::vector<std::vector<double>> seen_;
};

} // namespace

// ---------------------------------------------------------------- loader --

TEST_CASE("digits loader accepts well-formed rows") {
    const std::string path = write_temp("ok.csv", valid_line() + "\n");
    const Dataset d = load_digits_csv(path);
    CHECK(d.size() == 1);
    CHECK(d.feature_dim() == 64);
    CHECK(d.num_classes() == 10);
    CHECK(d.label(0) == 7);
    CHECK(d.row(0)[16] == 16.0);
}

TEST_CASE("digits loader rejects malformed input with line numbers") {
    SECTION("missing file") {
        CHECK_THROWS_WITH(load_digits_csv("/no/such/file.csv"),
                          Catch::Matchers::ContainsSubstring("cannot open"));
    }
    SECTION("wrong column count") {
        std::string short_line;
        for (int i = 0; i < 63; ++i) short_line += "1,";
        short_line += "1";
        const std::string path = write_temp("short.csv", valid_line() + "\n" + short_line + "\n");
        CHECK_THROWS_WITH(load_digits_csv(path),
                          Catch::Matchers::ContainsSubstring("line 2") &&
                              Catch::Matchers::ContainsSubstring("64"));
    }
    SECTION("feature out of range") {
        std::string line = "17," + valid_line().substr(2);
        const std::string path = write_temp("range.csv", line + "\n");
        CHECK_THROWS_WITH(load_digits_csv(path),
                          Catch::Matchers::ContainsSubstring("line 1") &&
                              Catch::Matchers::ContainsSubstring("outside [0, 16]"));
    }
    SECTION("label out of range") {
        const std::string path = write_temp("label.csv", valid_line(11) + "\n");
        CHECK_THROWS_WITH(load_digits_csv(path),
                          Catch::Matchers::ContainsSubstring("outside [0, 9]"));
    }
    SECTION("non-numeric token") {
        std::string line = valid_line();
        line[0] = 'x';
        const std::string path = write_temp("token.csv", line + "\n");
        CHECK_THROWS_WITH(load_digits_csv(path),
                          Catch::Matchers::ContainsSubstring("cannot parse"));
    }
    SECTION("empty file") {
        const std::string path = write_temp("empty.csv", "");
        CHECK_THROWS_WITH(load_digits_csv(path),
                          Catch::Matchers::ContainsSubstring("no data rows"));
    }
}

TEST_CASE("the bundled digits export has the canonical shape") {
    const Dataset d = load_digits_csv(kDigitsPath);
    CHECK(d.size() == 1797);
    CHECK(d.feature_dim() == 64);
    CHECK(d.num_classes() == 10);
}

// ---------------------------------------------------------------- report --

TEST_CASE("table report has a header and one line per row") {
    const std::string text = emit_report(fabricated_rows(), ReportFormat::table);
    std::stringstream ss(text);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(ss, line)) ++lines;
    CHECK(lines == 5);
    CHECK(text.find("Classifier") != std::string::npos);
    CHECK(text.find("(C) Cascading") != std::string::npos);
    CHECK(text.find("modeled") != std::string::npos);
}

TEST_CASE("csv report has exactly 7 columns per line") {
    const std::string text = emit_report(fabricated_rows(), ReportFormat::csv);
    std::stringstream ss(text);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(ss, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
    CHECK(lines == 5);
    CHECK(text.find("(R) Routing,0.62,0.19,0.88,33.13,30.83,modeled") != std::string::npos);
}

TEST_CASE("json report round-trips to identical bytes") {
    const std::string text = emit_report(fabricated_rows(), ReportFormat::json);
    const nlohmann::json parsed = nlohmann::json::parse(text);
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 4);
    CHECK(parsed[0].at("fraction_of_g") == 1.0);
    CHECK(parsed[2].at("accuracy") == 0.92);
    CHECK(parsed[3].at("energy_source") == "modeled");
    CHECK(parsed.dump(2) + '\n' == text);

    CHECK_THROWS_AS(emit_report({}, ReportFormat::table), std::invalid_argument);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.repeats = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.repeats = 1;
    cfg.epsilon = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

// ------------------------------------------------------------ experiment --

TEST_CASE("experiment produces the four rows with coherent accounting") {
    ExperimentConfig cfg = reduced_config();
    namespace fs = std::filesystem;
    const fs::path export_dir = fs::temp_directory_path() / "greenai_bench_test" / "models";
    fs::create_directories(export_dir);
    cfg.export_dir = export_dir.string();

    const std::vector<ReportRow> rows = run_experiment(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].classifier == "(G) Decision Tree");
    CHECK(rows[1].classifier == "(A) Neural Network");
    CHECK(rows[2].classifier == "(C) Cascading");
    CHECK(rows[3].classifier == "(R) Routing");

    // baseline rows: fraction in {0,1}, zero overhead
    CHECK(rows[0].fraction_of_g == 1.0);
    CHECK(rows[1].fraction_of_g == 0.0);
    CHECK(rows[0].overhead_ms == 0.0);
    CHECK(rows[1].overhead_ms == 0.0);

    // modeled meter: deterministic report, so time columns are not measured
    for (const ReportRow& r : rows) {
        CHECK(r.source == EnergySource::modeled);
        CHECK(r.time_ms == 0.0);
        CHECK(r.overhead_ms == 0.0);
    }

    // cascade energy sits strictly between the baselines and matches the
    // value recomputed from its fraction and the cost model
    const double f = rows[2].fraction_of_g;
    REQUIRE(f > 0.0);
    REQUIRE(f < 1.0);
    CHECK(rows[2].energy_uwh > rows[0].energy_uwh);
    CHECK(rows[2].energy_uwh < rows[1].energy_uwh);
    const auto n = 359.0; // test part of the 1797-row digits file
    const double recomputed = n * cfg.cost_model.per_model_cost[0] +
                              std::round((1.0 - f) * n) * cfg.cost_model.per_model_cost[1];
    CHECK_THAT(rows[2].energy_uwh, Catch::Matchers::WithinRel(recomputed, 1e-9));

    // exported models reload and drive the same chain
    const auto tree = model_from_json(load_json((export_dir / "tree.json").string()));
    const auto net = model_from_json(load_json((export_dir / "net.json").string()));
    const ModelChain chain({tree, net}, cfg.cost_model.per_model_cost);
    const RouterModel router =
        router_from_json(load_json((export_dir / "router.json").string()), chain);
    const Dataset full = load_digits_csv(cfg.dataset_path);
    const DatasetSplit parts = split(full, cfg.split);
    ModeledMeter meter(cfg.cost_model);
    const RunMetrics routed = route_evaluate(router, parts.test, meter);
    CHECK_THAT(routed.accuracy, Catch::Matchers::WithinAbs(rows[3].accuracy, 1e-12));

    fs::remove_all(export_dir);
}

TEST_CASE("repeats only smooth time and energy, never accuracy") {
    ExperimentConfig one = reduced_config();
    one.repeats = 1;
    ExperimentConfig three = reduced_config();
    three.repeats = 3;
    const std::vector<ReportRow> a = run_experiment(one);
    const std::vector<ReportRow> b = run_experiment(three);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a[i].accuracy == b[i].accuracy);
        CHECK(a[i].fraction_of_g == b[i].fraction_of_g);
    }
}

TEST_CASE("identical config with the modeled meter gives byte-identical reports") {
    const ExperimentConfig cfg = reduced_config();
    const std::vector<ReportRow> first = run_experiment(cfg);
    const std::vector<ReportRow> second = run_experiment(cfg);
    CHECK(emit_report(first, ReportFormat::csv) == emit_report(second, ReportFormat::csv));
    CHECK(emit_report(first, ReportFormat::json) == emit_report(second, ReportFormat::json));
}

TEST_CASE("epsilon sweep is monotone with exact boundary rows") {
    ExperimentConfig cfg = reduced_config();
    const std::vector<double> epsilons{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::vector<SweepRow> rows = sweep_epsilon(cfg, epsilons);
    REQUIRE(rows.size() == epsilons.size());

    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].fraction_of_g >= rows[i - 1].fraction_of_g);
    CHECK(rows.back().fraction_of_g == 1.0);

    // epsilon 1: the cascade is the tree alone
    const Dataset full = load_digits_csv(cfg.dataset_path);
    const DatasetSplit parts = split(full, cfg.split);
    DecisionTree tree(cfg.tree_max_depth);
    tree.fit(parts.train);
    std::vector<int> pred(parts.test.size());
    std::size_t pure = 0;
    for (std::size_t i = 0; i < parts.test.size(); ++i) {
        const Scored s = tree.evaluate(parts.test.row(i));
        pred[i] = s.label;
        if (s.confidence == 1.0) ++pure;
    }
    CHECK(rows.back().accuracy == accuracy(pred, parts.test.labels()));
    // epsilon 0: only pure-leaf instances stay with the tree
    CHECK(rows.front().fraction_of_g == static_cast<double>(pure) / parts.test.size());

    const std::string csv = emit_sweep_csv(rows);
    std::stringstream ss(csv);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(ss, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(lines == rows.size() + 1);

    CHECK_THROWS_AS(sweep_epsilon(cfg, {}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_epsilon(cfg, {1.2}), std::invalid_argument);
}

TEST_CASE("cascading never touches validation instances") {
    // access accounting: wrap the fitted chain models, run the cascade over
    // the test split, and require every evaluated vector to belong to the
    // test multiset — in particular none that exist only in validation
    ExperimentConfig cfg = reduced_config();
    const Dataset full = load_digits_csv(cfg.dataset_path);
    const TrainedStack stack = train_stack(cfg, full);

    auto recording_tree = std::make_shared<RecordingClassifier>(stack.tree);
    auto recording_net = std::make_shared<RecordingClassifier>(stack.net);
    const ModelChain watched({recording_tree, recording_net}, cfg.cost_model.per_model_cost);

    ModeledMeter meter(cfg.cost_model);
    cascade_evaluate(watched, CascadeConfig{cfg.epsilon}, stack.splits.test, meter);

    std::multiset<std::vector<double>> test_rows;
    for (std::size_t i = 0; i < stack.splits.test.size(); ++i) {
        auto r = stack.splits.test.row(i);
        test_rows.insert(std::vector<double>(r.begin(), r.end()));
    }
    std::set<std::vector<double>> val_only;
    for (std::size_t i = 0; i < stack.splits.val.size(); ++i) {
        auto r = stack.splits.val.row(i);
        std::vector<double> row(r.begin(), r.end());
        if (test_rows.count(row) == 0) val_only.insert(std::move(row));
    }

    CHECK(recording_tree->seen().size() == stack.splits.test.size()); // model 1 runs everywhere
    CHECK(recording_net->seen().size() < stack.splits.test.size());   // only escalations
    for (const auto* rec : {recording_tree.get(), recording_net.get()}) {
        for (const auto& x : rec->seen()) {
            CHECK(test_rows.count(x) > 0);
            CHECK(val_only.count(x) == 0);
        }
    }
}
