// hmdn: command-line front end for the indoor-positioning experiment.
//
//   hmdn [--config file] [flags] simulate | train --which g1|g2|both | predict | evaluate | run
//   hmdn plot --dump file [--plot-dir dir] [--scene file]
//
// Flags given on the command line override values from --config.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmdn/cli.hpp"

namespace {

using hmdn::cli::ExperimentConfig;

struct Flags {
    std::string config_path;
    std::string scene, out, train_csv, test_csv, normalization;
    std::size_t n_train = 0, n_test = 0, m = 0, n = 0, resamples = 0;
    std::size_t g1_epochs = 0, g2_epochs = 0, g1_k = 0, g2_k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> records;
    std::vector<std::string> conditions;
};

void add_experiment_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config_path, "JSON experiment config; flags override it")->check(CLI::ExistingFile);
    app.add_option("--scene", f.scene, "scene JSON (default: built-in paper room)");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--train-csv", f.train_csv, "training fingerprint CSV (default: <out>/train.csv)");
    app.add_option("--test-csv", f.test_csv, "test fingerprint CSV (default: <out>/test.csv)");
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--n-train", f.n_train, "records simulated for training");
    app.add_option("--n-test", f.n_test, "records simulated for testing");
    app.add_option("--candidates", f.m, "candidates sampled from g1 (M)");
    app.add_option("--selected", f.n, "candidates kept after scoring (N)");
    app.add_option("--g1-epochs", f.g1_epochs, "training epochs for g1");
    app.add_option("--g2-epochs", f.g2_epochs, "training epochs for g2");
    app.add_option("--g1-components", f.g1_k, "mixture components in g1");
    app.add_option("--g2-components", f.g2_k, "mixture components in g2");
    app.add_option("--records", f.records, "test record indices shown by predict");
    app.add_option("--conditions", f.conditions, "conditions to use (default: all in the data)");
    app.add_option("--normalization", f.normalization, "RSSI normalization")
        ->check(CLI::IsMember({"zero_one", "powed"}));
    app.add_option("--bootstrap", f.resamples, "bootstrap resamples in evaluate");
    app.add_flag("--noisy-lux", "score with the noisy illuminance columns");
    app.add_flag("--weighted-mean", "weight the selected candidates by softmax(score)");
}

ExperimentConfig resolve(const CLI::App& app, const Flags& f) {
    ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{} : hmdn::cli::load_config(f.config_path);
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--scene")) c.scene_path = f.scene;
    if (given("--out")) c.output_dir = f.out;
    if (given("--train-csv")) c.train_csv = f.train_csv;
    if (given("--test-csv")) c.test_csv = f.test_csv;
    if (given("--seed")) c.master_seed = f.seed;
    if (given("--n-train")) c.n_train = f.n_train;
    if (given("--n-test")) c.n_test = f.n_test;
    if (given("--candidates")) c.n_candidates = f.m;
    if (given("--selected")) c.n_selected = f.n;
    if (given("--g1-epochs")) c.g1.epochs = f.g1_epochs;
    if (given("--g2-epochs")) c.g2.epochs = f.g2_epochs;
    if (given("--g1-components")) c.g1.n_components = f.g1_k;
    if (given("--g2-components")) c.g2.n_components = f.g2_k;
    if (given("--records")) c.records = f.records;
    if (given("--conditions")) c.conditions = f.conditions;
    if (given("--normalization")) {
        c.rssi_normalization =
            f.normalization == "powed" ? hmdn::RssiNormalizationMode::powed : hmdn::RssiNormalizationMode::zero_one;
    }
    if (given("--bootstrap")) c.bootstrap_resamples = f.resamples;
    if (given("--noisy-lux")) c.use_noisy_lux = true;
    if (given("--weighted-mean")) c.weighted_mean = true;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical mixture density networks for fingerprint + illuminance positioning"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    add_experiment_flags(app, f);

    auto* simulate = app.add_subcommand("simulate", "generate train/test fingerprint CSVs from the scene");
    auto* train = app.add_subcommand("train", "train g1 (fingerprint -> position) or g2 (position -> lux)");
    std::string which = "both";
    train->add_option("--which", which, "model to train")->check(CLI::IsMember({"g1", "g2", "both"}));
    auto* predict = app.add_subcommand("predict", "estimate the demo records; write dump and SVG plots");
    auto* evaluate = app.add_subcommand("evaluate", "baseline vs HMDN error over every test record");
    auto* run = app.add_subcommand("run", "simulate, train both models, predict, evaluate");
    auto* plot = app.add_subcommand("plot", "render SVG plots from an estimate dump");
    std::string dump_path, plot_dir = ".";
    plot->add_option("--dump", dump_path, "estimate dump file")->required();
    plot->add_option("--plot-dir", plot_dir, "directory for the SVG files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? hmdn::cli::kOk : hmdn::cli::kUsage;
    }

    try {
        const ExperimentConfig cfg = resolve(app, f);
        auto& log = std::cout;
        if (*plot) {
            hmdn::cli::cmd_plot(dump_path, hmdn::cli::scene_for(cfg), plot_dir, log);
            return hmdn::cli::kOk;
        }
        if (*simulate || *run) hmdn::cli::cmd_simulate(cfg, log);
        if (*train || *run) {
            if (which != "g2") hmdn::cli::cmd_train(cfg, "g1", log);
            if (which != "g1") hmdn::cli::cmd_train(cfg, "g2", log);
        }
        if (*predict || *run) hmdn::cli::cmd_predict(cfg, log);
        if (*evaluate || *run) hmdn::cli::cmd_evaluate(cfg, log);
    } catch (const std::exception& e) {
        std::cerr << "hmdn: error: " << e.what() << "\n";
        return hmdn::cli::exit_code_for(e);
    }
    return hmdn::cli::kOk;
}
