// JSON persistence for MdnConfig and MdnModel. Doubles are written in the
// shortest form that parses back to the identical bit pattern, so a reload is
// bit-exact. Schema: docs/formats.md.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hmdn/mdn.hpp"

namespace hmdn {

inline constexpr const char* kModelFormat = "hmdn-mdn-model";
inline constexpr int kModelFormatVersion = 1;

class FormatError : public Error {
public:
    using Error::Error;
};

inline std::string to_string(HiddenActivation a) { return a == HiddenActivation::tanh ? "tanh" : "relu"; }
inline std::string to_string(OptimizerKind o) { return o == OptimizerKind::adam ? "adam" : "sgd"; }

inline HiddenActivation parse_activation(const std::string& s) {
    if (s == "tanh") return HiddenActivation::tanh;
    if (s == "relu") return HiddenActivation::relu;
    throw FormatError("unknown hidden activation '" + s + "'");
}

inline OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "sgd") return OptimizerKind::sgd;
    throw FormatError("unknown optimizer '" + s + "'");
}

inline nlohmann::json config_to_json(const MdnConfig& c) {
    nlohmann::json j;
    j["input_dim"] = c.input_dim;
    j["target_dim"] = c.target_dim;
    j["n_components"] = c.n_components;
    j["hidden_layers"] = c.hidden_layers;
    j["hidden_activation"] = to_string(c.hidden_activation);
    j["learning_rate"] = c.learning_rate;
    j["optimizer"] = {{"kind", to_string(c.optimizer)},
                      {"beta1", c.adam.beta1},
                      {"beta2", c.adam.beta2},
                      {"eps", c.adam.eps}};
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["sigma_floor"] = c.sigma_floor;
    j["patience"] = c.patience;
    j["standardize"] = c.standardize;
    j["seed"] = c.seed;
    return j;
}

/// Reads a config; absent keys keep the values already in `base`.
inline MdnConfig config_from_json(const nlohmann::json& j, MdnConfig base = {}) {
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("input_dim", base.input_dim);
        get("target_dim", base.target_dim);
        get("n_components", base.n_components);
        get("hidden_layers", base.hidden_layers);
        if (j.contains("hidden_activation")) base.hidden_activation = parse_activation(j.at("hidden_activation"));
        get("learning_rate", base.learning_rate);
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            if (o.is_string()) {
                base.optimizer = parse_optimizer(o.get<std::string>());
            } else {
                if (o.contains("kind")) base.optimizer = parse_optimizer(o.at("kind"));
                if (o.contains("beta1")) base.adam.beta1 = o.at("beta1");
                if (o.contains("beta2")) base.adam.beta2 = o.at("beta2");
                if (o.contains("eps")) base.adam.eps = o.at("eps");
            }
        }
        get("epochs", base.epochs);
        get("batch_size", base.batch_size);
        get("sigma_floor", base.sigma_floor);
        get("patience", base.patience);
        get("standardize", base.standardize);
        get("seed", base.seed);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid MDN config: ") + e.what());
    }
    return base;
}

inline nlohmann::json model_to_json(const MdnModel& m) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelFormatVersion;
    j["config"] = config_to_json(m.config());
    const auto& s = m.standardization();
    j["standardization"] = {{"input_mean", s.input_mean},
                            {"input_scale", s.input_scale},
                            {"target_mean", s.target_mean},
                            {"target_scale", s.target_scale}};
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.layers()) {
        layers.push_back({{"rows", l.weights.rows()},
                          {"cols", l.weights.cols()},
                          {"weights", l.weights.data()},
                          {"bias", l.bias}});
    }
    j["layers"] = std::move(layers);
    j["training_log"] = m.training_log();
    if (std::isfinite(m.final_nll())) {
        j["final_nll"] = m.final_nll();
    } else {
        j["final_nll"] = nullptr;
    }
    return j;
}

inline MdnModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw FormatError("not an MDN model document");
        const int version = j.at("version");
        if (version != kModelFormatVersion) {
            throw FormatError("unsupported model format version " + std::to_string(version));
        }
        const MdnConfig cfg = config_from_json(j.at("config"));
        const auto& sj = j.at("standardization");
        Standardization s{sj.at("input_mean"), sj.at("input_scale"), sj.at("target_mean"), sj.at("target_scale")};
        std::vector<Layer> layers;
        for (const auto& lj : j.at("layers")) {
            layers.push_back({Matrix(lj.at("rows"), lj.at("cols"), lj.at("weights").get<std::vector<double>>()),
                              lj.at("bias").get<std::vector<double>>()});
        }
        const double final_nll = j.at("final_nll").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                              : j.at("final_nll").get<double>();
        return MdnModel(cfg, std::move(layers), std::move(s), j.at("training_log").get<std::vector<double>>(),
                        final_nll);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    }
}

inline std::string serialize_model(const MdnModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline void save_model(const MdnModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open model file for writing: " + path);
    out << serialize_model(m);
    if (!out) throw IoError("failed writing model file: " + path);
}

inline MdnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model file " + path + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace hmdn
