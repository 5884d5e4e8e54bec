// Experiment commands behind the `hmdn` executable: simulate, train, predict,
// evaluate, plot. Each command is a pure function of the files it reads, the
// ExperimentConfig and the master seed.
//
// Stage seeds are derive_seed(master_seed, stage) with these stage names:
//   simulate/train, simulate/test, train/g1, train/g2,
//   predict/<record>/<condition>/hmdn, predict/<record>/<condition>/baseline,
//   evaluate/bootstrap/<condition>
// where <record> is the zero-based test-record index. predict and evaluate use
// the same per-record seeds, so their estimates coincide.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmdn/dataio.hpp"
#include "hmdn/evaluate.hpp"
#include "hmdn/hmdn.hpp"
#include "hmdn/mdn.hpp"
#include "hmdn/mdn_io.hpp"
#include "hmdn/scenario.hpp"
#include "hmdn/svg.hpp"

namespace hmdn::cli {

/// Inconsistent or invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Exit code for an exception escaping a command.
inline ExitCode exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
    if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
    return kData;
}

inline MdnConfig default_g1_config() {
    MdnConfig c;
    c.input_dim = 0;  // inferred from the WAP columns
    c.target_dim = 2;
    c.n_components = 5;
    return c;
}

inline MdnConfig default_g2_config() {
    MdnConfig c;
    c.input_dim = 2;
    c.target_dim = 1;
    c.n_components = 3;
    c.sigma_floor = 1.0;  // lux; finer spreads would rank candidates on fitting noise
    return c;
}

struct ExperimentConfig {
    std::string scene_path;  // empty: built-in paper room
    std::string output_dir = "hmdn_out";
    std::string train_csv;  // empty: <output_dir>/train.csv
    std::string test_csv;   // empty: <output_dir>/test.csv
    std::size_t n_train = 100;
    std::size_t n_test = 100;
    MdnConfig g1 = default_g1_config();
    MdnConfig g2 = default_g2_config();
    std::size_t n_candidates = 100;
    std::size_t n_selected = 20;
    std::vector<std::string> conditions;  // empty: every LUX column in the data
    std::uint64_t master_seed = 0;
    std::vector<std::size_t> records{0, 1, 2};  // test records shown by predict
    bool use_noisy_lux = false;
    RssiNormalizationMode rssi_normalization = RssiNormalizationMode::zero_one;
    std::size_t bootstrap_resamples = 10000;
    bool weighted_mean = false;

    std::string path(const std::string& name) const { return (std::filesystem::path(output_dir) / name).string(); }
    std::string train_path() const { return train_csv.empty() ? path("train.csv") : train_csv; }
    std::string test_path() const { return test_csv.empty() ? path("test.csv") : test_csv; }
    std::string model_path(const std::string& which) const { return path(which + ".model.json"); }

    void validate() const {
        if (n_selected < 1 || n_selected > n_candidates) {
            throw ConfigError("need 1 <= N <= M, got M=" + std::to_string(n_candidates) +
                              ", N=" + std::to_string(n_selected));
        }
        if (g1.target_dim != 2) throw ConfigError("g1 must predict 2D coordinates (target_dim = 2)");
        if (g2.input_dim != 2) {
            throw ConfigError("g2 input dimension must equal 2 (coordinates), got " + std::to_string(g2.input_dim));
        }
        if (g2.target_dim != 1) throw ConfigError("g2 must predict a scalar illuminance (target_dim = 1)");
    }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
    try {
        c.scene_path = j.value("scene", c.scene_path);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.train_csv = j.value("train_csv", c.train_csv);
        c.test_csv = j.value("test_csv", c.test_csv);
        c.n_train = j.value("n_train", c.n_train);
        c.n_test = j.value("n_test", c.n_test);
        if (j.contains("g1")) c.g1 = hmdn::config_from_json(j.at("g1"), c.g1);
        if (j.contains("g2")) c.g2 = hmdn::config_from_json(j.at("g2"), c.g2);
        c.n_candidates = j.value("n_candidates", c.n_candidates);
        c.n_selected = j.value("n_selected", c.n_selected);
        c.conditions = j.value("conditions", c.conditions);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.records = j.value("records", c.records);
        c.use_noisy_lux = j.value("use_noisy_lux", c.use_noisy_lux);
        if (j.contains("rssi_normalization")) {
            const std::string m = j.at("rssi_normalization");
            if (m == "zero_one") {
                c.rssi_normalization = RssiNormalizationMode::zero_one;
            } else if (m == "powed") {
                c.rssi_normalization = RssiNormalizationMode::powed;
            } else {
                throw ConfigError("unknown rssi_normalization '" + m + "'");
            }
        }
        c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
        c.weighted_mean = j.value("weighted_mean", c.weighted_mean);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

inline Scene scene_for(const ExperimentConfig& cfg) {
    return cfg.scene_path.empty() ? paper_room_scene() : load_scene(cfg.scene_path);
}

inline void ensure_output_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
        throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    }
}

struct SimulateResult {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

inline SimulateResult cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.n_train < 1 || cfg.n_test < 1) throw ConfigError("simulate: point counts must be >= 1");
    const Scene scene = scene_for(cfg);
    ensure_output_dir(cfg);
    Rng train_rng(derive_seed(cfg.master_seed, "simulate/train"));
    Rng test_rng(derive_seed(cfg.master_seed, "simulate/test"));
    const auto train = generate_dataset(scene, cfg.n_train, train_rng);
    const auto test = generate_dataset(scene, cfg.n_test, test_rng);
    save_csv(table_from_records(scene, train), cfg.train_path());
    save_csv(table_from_records(scene, test), cfg.test_path());
    log << "simulate: wrote " << train.size() << " records to " << cfg.train_path() << "\n"
        << "simulate: wrote " << test.size() << " records to " << cfg.test_path() << "\n";
    return {train.size(), test.size()};
}

inline std::vector<std::string> conditions_for(const ExperimentConfig& cfg, const FingerprintTable& t) {
    if (!cfg.conditions.empty()) {
        for (const auto& c : cfg.conditions) t.lux_index(c);
        return cfg.conditions;
    }
    return t.lux_names;
}

inline double observed_lux(const ExperimentConfig& cfg, const FingerprintTable& t, std::size_t r,
                           const std::string& condition) {
    const std::size_t c = t.lux_index(condition);
    if (cfg.use_noisy_lux) {
        if (t.lux_noisy.cols() == 0) throw ConfigError("use_noisy_lux is set but the data has no LUXN_ columns");
        return t.lux_noisy(r, c);
    }
    return t.lux(r, c);
}

inline Dataset g1_dataset(const ExperimentConfig& cfg, const FingerprintTable& t) {
    const auto feats = normalize_rssi(t, cfg.rssi_normalization);
    Dataset d;
    d.reserve(t.n_records());
    for (std::size_t r = 0; r < t.n_records(); ++r) {
        const auto row = feats.features.row(r);
        d.push_back({Vector(row.begin(), row.end()), t.position(r)});
    }
    return d;
}

/// One (position, lux) sample per record and condition; the condition itself is
/// not an input, so g2 learns the multimodal lux distribution at each position.
inline Dataset g2_dataset(const ExperimentConfig& cfg, const FingerprintTable& t) {
    const auto conds = conditions_for(cfg, t);
    if (conds.empty()) throw ConfigError("training data has no LUX_<condition> columns");
    Dataset d;
    for (std::size_t r = 0; r < t.n_records(); ++r) {
        for (const auto& c : conds) d.push_back({t.position(r), {observed_lux(cfg, t, r, c)}});
    }
    return d;
}

struct TrainResult {
    MdnModel model;
    std::string model_path;
    std::string log_path;
};

inline TrainResult cmd_train(const ExperimentConfig& cfg, const std::string& which, std::ostream& log) {
    cfg.validate();
    if (which != "g1" && which != "g2") throw ConfigError("--which must be g1 or g2, got '" + which + "'");
    const auto table = load_csv(cfg.train_path());
    MdnConfig mc = which == "g1" ? cfg.g1 : cfg.g2;
    Dataset data = which == "g1" ? g1_dataset(cfg, table) : g2_dataset(cfg, table);
    if (which == "g1") {
        if (mc.input_dim == 0) mc.input_dim = table.n_waps();
        if (mc.input_dim != table.n_waps()) {
            throw ConfigError("g1 input_dim is " + std::to_string(mc.input_dim) + " but the data has " +
                              std::to_string(table.n_waps()) + " WAP columns");
        }
    }
    mc.seed = derive_seed(cfg.master_seed, "train/" + which);
    ensure_output_dir(cfg);
    const MdnModel model = train(data, mc);
    TrainResult out{model, cfg.model_path(which), cfg.path(which + "_training_log.csv")};
    save_model(model, out.model_path);
    std::ofstream csv(out.log_path, std::ios::binary);
    if (!csv) throw IoError("cannot write training log " + out.log_path);
    csv << "epoch,mean_nll\n";
    for (std::size_t e = 0; e < model.training_log().size(); ++e) {
        csv << e + 1 << ',' << format_number(model.training_log()[e]) << '\n';
    }
    log << "train " << which << ": " << data.size() << " samples, " << model.training_log().size()
        << " epochs, final NLL " << format_number(model.final_nll()) << "\nwrote " << out.model_path << "\n";
    return out;
}

inline MdnModel load_trained(const ExperimentConfig& cfg, const std::string& which) {
    const auto p = cfg.model_path(which);
    if (!std::filesystem::exists(p)) {
        throw IoError("model file " + p + " not found; run `hmdn train --which " + which + "` first");
    }
    return load_model(p);
}

inline HmdnPipeline pipeline_for(const ExperimentConfig& cfg) {
    HmdnPipeline p{load_trained(cfg, "g1"), load_trained(cfg, "g2"), cfg.n_candidates, cfg.n_selected,
                   cfg.weighted_mean};
    p.validate();
    return p;
}

/// Baseline and filtered estimate for one test record under one condition.
inline DumpRecord run_record(const ExperimentConfig& cfg, const HmdnPipeline& p, const FingerprintTable& test,
                             const Matrix& features, std::size_t r, const std::string& condition) {
    const auto row = features.row(r);
    const Vector x(row.begin(), row.end());
    const Vector z{observed_lux(cfg, test, r, condition)};
    const std::string stage = "predict/" + std::to_string(r) + "/" + condition;
    Rng hmdn_rng(derive_seed(cfg.master_seed, stage + "/hmdn"));
    Rng base_rng(derive_seed(cfg.master_seed, stage + "/baseline"));
    DumpRecord rec;
    rec.id = std::to_string(r);
    rec.condition = condition;
    rec.truth = test.position(r);
    rec.z = z;
    rec.result = predict(p, x, z, hmdn_rng);
    rec.baseline = predict_baseline(p.g1, x, base_rng, cfg.n_candidates);
    return rec;
}

inline std::vector<DumpRecord> cmd_predict(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto p = pipeline_for(cfg);
    const auto test = load_csv(cfg.test_path());
    const auto feats = normalize_rssi(test, cfg.rssi_normalization);
    const Scene scene = scene_for(cfg);
    ensure_output_dir(cfg);
    std::vector<DumpRecord> out;
    const std::string dump_path = cfg.path("predict_dump.txt");
    std::ofstream dump(dump_path, std::ios::binary);
    if (!dump) throw IoError("cannot write " + dump_path);
    write_dump_header(dump);
    const PlotFrame frame{scene.room_width, scene.room_depth};
    for (auto r : cfg.records) {
        if (r >= test.n_records()) {
            throw ConfigError("record " + std::to_string(r) + " out of range; test set has " +
                              std::to_string(test.n_records()) + " records");
        }
        for (const auto& c : conditions_for(cfg, test)) {
            auto rec = run_record(cfg, p, test, feats.features, r, c);
            write_dump_record(dump, rec);
            const std::string plot = cfg.path("plot_" + rec.id + "_" + c + ".svg");
            save_plot_svg(plot, frame, rec);
            log << "record " << rec.id << " " << c << ": truth (" << rec.truth[0] << ", " << rec.truth[1]
                << ") baseline (" << rec.baseline[0] << ", " << rec.baseline[1] << ") hmdn ("
                << rec.result.estimate[0] << ", " << rec.result.estimate[1] << ")"
                << (rec.result.all_underflow ? " [all scores underflowed]" : "") << "\n";
            out.push_back(std::move(rec));
        }
    }
    log << "wrote " << dump_path << "\n";
    return out;
}

struct EvaluationReport {
    std::vector<ConditionComparison> conditions;
    std::vector<DumpRecord> records;
};

inline std::vector<ConditionComparison> comparisons_from_errors(
    const ExperimentConfig& cfg, const std::vector<std::pair<std::string, ErrorLists>>& errors) {
    std::vector<ConditionComparison> out;
    for (const auto& [cond, lists] : errors) {
        Rng boot(derive_seed(cfg.master_seed, "evaluate/bootstrap/" + cond));
        out.push_back(compare_errors(cond, lists.baseline, lists.hmdn, boot, cfg.bootstrap_resamples));
    }
    return out;
}

inline EvaluationReport cmd_evaluate(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto p = pipeline_for(cfg);
    const auto test = load_csv(cfg.test_path());
    if (test.n_records() == 0) throw ArgumentError("evaluate: the test set is empty");
    const auto feats = normalize_rssi(test, cfg.rssi_normalization);
    ensure_output_dir(cfg);

    EvaluationReport report;
    std::vector<std::pair<std::string, ErrorLists>> errors;
    for (const auto& c : conditions_for(cfg, test)) {
        ErrorLists lists;
        for (std::size_t r = 0; r < test.n_records(); ++r) {
            auto rec = run_record(cfg, p, test, feats.features, r, c);
            lists.baseline.push_back(euclidean_distance(rec.baseline, rec.truth));
            lists.hmdn.push_back(euclidean_distance(rec.result.estimate, rec.truth));
            report.records.push_back(std::move(rec));
        }
        errors.emplace_back(c, std::move(lists));
    }
    report.conditions = comparisons_from_errors(cfg, errors);

    {
        std::ofstream dump(cfg.path("evaluate_dump.txt"), std::ios::binary);
        if (!dump) throw IoError("cannot write " + cfg.path("evaluate_dump.txt"));
        write_dump_header(dump);
        for (const auto& rec : report.records) write_dump_record(dump, rec);
    }
    {
        std::ofstream csv(cfg.path("metrics.csv"), std::ios::binary);
        if (!csv) throw IoError("cannot write " + cfg.path("metrics.csv"));
        write_metrics_csv(csv, report.conditions);
    }
    std::ostringstream table;
    write_metrics_table(table, report.conditions);
    {
        std::ofstream txt(cfg.path("metrics.txt"), std::ios::binary);
        txt << table.str();
    }
    log << table.str();
    return report;
}

/// Re-renders every record of an estimate dump as SVG files in `out_dir`.
inline std::size_t cmd_plot(const std::string& dump_path, const Scene& scene, const std::string& out_dir,
                            std::ostream& log) {
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) throw IoError("cannot open estimate dump " + dump_path);
    const auto records = read_dump(in);
    std::filesystem::create_directories(out_dir);
    const PlotFrame frame{scene.room_width, scene.room_depth};
    for (const auto& r : records) {
        save_plot_svg((std::filesystem::path(out_dir) / ("plot_" + r.id + "_" + r.condition + ".svg")).string(), frame,
                      r);
    }
    log << "plotted " << records.size() << " records into " << out_dir << "\n";
    return records.size();
}

}  // namespace hmdn::cli
