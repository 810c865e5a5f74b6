// Command line front end: benchmark runs, epsilon sweeps, and single-model
// train/eval utilities on digits-format CSV data.

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "greenai/greenai.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

greenai::MeterChoice parse_meter(const std::string& name) {
    if (name == "modeled") return greenai::MeterChoice::modeled;
    if (name == "proxy") return greenai::MeterChoice::proxy;
    if (name == "oscounter") return greenai::MeterChoice::oscounter;
    throw CLI::ValidationError("--meter", "expected one of: modeled, proxy, oscounter");
}

greenai::ReportFormat parse_format(const std::string& name) {
    if (name == "table") return greenai::ReportFormat::table;
    if (name == "csv") return greenai::ReportFormat::csv;
    if (name == "json") return greenai::ReportFormat::json;
    throw CLI::ValidationError("--format", "expected one of: table, csv, json");
}

struct ExperimentFlags {
    std::string data = "data/digits.csv";
    double epsilon = 0.2;
    int repeats = 1000;
    std::string meter = "proxy";
    std::uint64_t seed = 37;
    std::string format = "table";
    std::string export_dir;
    std::string costs;
    double router_cost = -1.0;
    double proxy_watts = 10.0;
    int epochs = -1;
    double carbon_intensity = -1.0;
};

void add_experiment_flags(CLI::App& cmd, ExperimentFlags& f, bool with_run_flags) {
    cmd.add_option("--data", f.data, "dataset CSV path")->capture_default_str();
    cmd.add_option("--seed", f.seed, "split shuffle seed")->capture_default_str();
    cmd.add_option("--meter", f.meter, "energy meter: modeled, proxy, oscounter")
        ->capture_default_str();
    cmd.add_option("--costs", f.costs,
                   "comma-separated per-prediction modeled costs, cheapest first");
    cmd.add_option("--router-cost", f.router_cost, "modeled cost per router decision");
    cmd.add_option("--proxy-watts", f.proxy_watts, "constant power for the proxy meter")
        ->capture_default_str();
    cmd.add_option("--epochs", f.epochs, "network training epochs (default 200)");
    if (with_run_flags) {
        cmd.add_option("--epsilon", f.epsilon, "cascade confidence tolerance")
            ->capture_default_str();
        cmd.add_option("--repeats", f.repeats, "test-set passes averaged for time/energy")
            ->capture_default_str();
        cmd.add_option("--format", f.format, "report format: table, csv, json")
            ->capture_default_str();
        cmd.add_option("--export-models", f.export_dir,
                       "directory for trained model JSON files");
        cmd.add_option("--carbon-intensity", f.carbon_intensity,
                       "append a carbon footprint summary (gCO2e/kWh)");
    }
}

greenai::ExperimentConfig to_config(const ExperimentFlags& f) {
    greenai::ExperimentConfig cfg;
    cfg.dataset_path = f.data;
    cfg.split.seed = f.seed;
    cfg.epsilon = f.epsilon;
    cfg.repeats = f.repeats;
    cfg.meter = parse_meter(f.meter);
    cfg.format = parse_format(f.format);
    cfg.export_dir = f.export_dir;
    cfg.proxy_watts = f.proxy_watts;
    if (f.epochs >= 0) cfg.net.epochs = f.epochs;
    if (!f.costs.empty()) cfg.cost_model.per_model_cost = parse_double_list(f.costs);
    if (f.router_cost >= 0.0) cfg.cost_model.router_cost = f.router_cost;
    return cfg;
}

int run_bench(const ExperimentFlags& flags) {
    const greenai::ExperimentConfig cfg = to_config(flags);
    const std::vector<greenai::ReportRow> rows = greenai::run_experiment(cfg);
    std::cout << greenai::emit_report(rows, cfg.format);
    if (flags.carbon_intensity >= 0.0)
        std::cout << greenai::carbon_summary(rows, flags.carbon_intensity);
    return 0;
}

int run_sweep(const ExperimentFlags& flags, const std::string& epsilons_csv) {
    const std::vector<double> epsilons = parse_double_list(epsilons_csv);
    const greenai::ExperimentConfig cfg = to_config(flags);
    std::cout << greenai::emit_sweep_csv(greenai::sweep_epsilon(cfg, epsilons));
    return 0;
}

struct ModelFlags {
    std::string data = "data/digits.csv";
    std::string kind = "tree";
    std::string out;
    std::string model_file;
    std::string part = "test";
    std::uint64_t seed = 37;
    int epochs = -1;
    int max_depth = 5;
};

const greenai::Dataset& pick_part(const greenai::DatasetSplit& s, const std::string& part) {
    if (part == "train") return s.train;
    if (part == "val") return s.val;
    if (part == "test") return s.test;
    throw CLI::ValidationError("--split", "expected one of: train, val, test");
}

int run_model_train(const ModelFlags& f) {
    const greenai::Dataset full = greenai::load_digits_csv(f.data);
    const greenai::DatasetSplit parts =
        greenai::split(full, greenai::SplitSpec{0.6, 0.2, 0.2, f.seed});

    std::shared_ptr<greenai::Classifier> model;
    if (f.kind == "tree") {
        model = std::make_shared<greenai::DecisionTree>(f.max_depth);
    } else if (f.kind == "net") {
        greenai::NetConfig cfg = greenai::default_digits_net_config();
        cfg.seed = f.seed;
        if (f.epochs >= 0) cfg.epochs = f.epochs;
        model = std::make_shared<greenai::FeedforwardNet>(cfg);
    } else if (f.kind == "softmax") {
        greenai::SoftmaxConfig cfg = greenai::default_digits_router_config();
        cfg.seed = f.seed;
        if (f.epochs >= 0) cfg.epochs = f.epochs;
        model = std::make_shared<greenai::SoftmaxRegressor>(cfg);
    } else {
        throw CLI::ValidationError("--kind", "expected one of: tree, net, softmax");
    }

    model->fit(parts.train);
    auto evaluate_part = [&](const greenai::Dataset& part) {
        std::vector<int> pred(part.size());
        for (std::size_t i = 0; i < part.size(); ++i) pred[i] = model->predict(part.row(i));
        return greenai::accuracy(pred, part.labels());
    };
    std::printf("%s: train accuracy %.4f, test accuracy %.4f\n", f.kind.c_str(),
                evaluate_part(parts.train), evaluate_part(parts.test));
    if (!f.out.empty()) {
        greenai::save_json(f.out, greenai::model_to_json(*model));
        std::printf("wrote %s\n", f.out.c_str());
    }
    return 0;
}

int run_model_eval(const ModelFlags& f) {
    if (f.model_file.empty()) throw CLI::ValidationError("--model", "model file required");
    const std::shared_ptr<greenai::Classifier> model =
        greenai::model_from_json(greenai::load_json(f.model_file));
    const greenai::Dataset full = greenai::load_digits_csv(f.data);
    const greenai::DatasetSplit parts =
        greenai::split(full, greenai::SplitSpec{0.6, 0.2, 0.2, f.seed});
    const greenai::Dataset& part = pick_part(parts, f.part);

    greenai::WallclockProxyMeter meter(10.0);
    meter.begin();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> pred(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) pred[i] = model->predict(part.row(i));
    const greenai::Milliseconds elapsed = std::chrono::steady_clock::now() - t0;
    const greenai::EnergySample sample = meter.end();

    std::printf("%s on %s split: accuracy %.4f, time %.3f ms, energy %.4f uWh (%s)\n",
                f.model_file.c_str(), f.part.c_str(), greenai::accuracy(pred, part.labels()),
                elapsed.count(), sample.energy_uwh, greenai::to_string(sample.source));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic model selection benchmark: cascading and routing over a "
                 "cheap-to-expensive classifier chain with pluggable energy metering"};
    app.require_subcommand(1);

    ExperimentFlags bench_flags;
    std::string epsilons_csv = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";

    CLI::App* bench = app.add_subcommand("bench", "benchmark experiments");
    bench->require_subcommand(1);
    CLI::App* bench_run = bench->add_subcommand("run", "train the stack and print the report");
    add_experiment_flags(*bench_run, bench_flags, true);
    CLI::App* bench_sweep =
        bench->add_subcommand("sweep", "cascade accuracy/energy across epsilon values (CSV)");
    add_experiment_flags(*bench_sweep, bench_flags, false);
    bench_sweep->add_option("--epsilons", epsilons_csv, "comma-separated epsilon values")
        ->capture_default_str();

    ModelFlags model_flags;
    CLI::App* model = app.add_subcommand("model", "single-model utilities");
    model->require_subcommand(1);
    CLI::App* model_train = model->add_subcommand("train", "train one model and save it");
    model_train->add_option("--data", model_flags.data, "dataset CSV path")->capture_default_str();
    model_train->add_option("--kind", model_flags.kind, "tree, net, or softmax")
        ->capture_default_str();
    model_train->add_option("--out", model_flags.out, "output JSON path");
    model_train->add_option("--seed", model_flags.seed, "split / training seed")
        ->capture_default_str();
    model_train->add_option("--epochs", model_flags.epochs, "training epochs");
    model_train->add_option("--max-depth", model_flags.max_depth, "tree depth limit")
        ->capture_default_str();

    CLI::App* model_eval = model->add_subcommand("eval", "evaluate a saved model");
    model_eval->add_option("--model", model_flags.model_file, "model JSON path");
    model_eval->add_option("--data", model_flags.data, "dataset CSV path")->capture_default_str();
    model_eval->add_option("--split", model_flags.part, "train, val, or test")
        ->capture_default_str();
    model_eval->add_option("--seed", model_flags.seed, "split seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench_run->parsed()) return run_bench(bench_flags);
        if (bench_sweep->parsed()) return run_sweep(bench_flags, epsilons_csv);
        if (model_train->parsed()) return run_model_train(model_flags);
        if (model_eval->parsed()) return run_model_eval(model_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
