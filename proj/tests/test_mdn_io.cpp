#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "hmdn/mdn_io.hpp"

using namespace hmdn;

namespace {

void expect_same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i])) << "index " << i;
    }
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hmdn_test_" + name)).string();
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        auto m = check::random_model(rng, 1 + rng.index(3), 1 + rng.index(3), 1 + rng.index(4),
                                     HiddenActivation::relu);
        auto layers = m.layers();
        // awkward values: tiny, huge, negative zero, subnormal, values with 17 significant digits
        layers[0].weights.data()[0] = 1e-300;
        layers[0].bias[0] = -0.0;
        layers.back().bias[0] = 4.9406564584124654e-324;
        layers.back().weights.data()[0] = 0.1 + 0.2;
        layers.back().weights.data().back() = -1.7976931348623157e308;
        m = MdnModel(m.config(), layers, m.standardization(), {1.5, 1.25, 1.0 / 3.0}, 2.0 / 3.0);

        const auto back = model_from_json(nlohmann::json::parse(serialize_model(m)));
        EXPECT_EQ(back.config(), m.config());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            expect_same_bits(back.layers()[l].weights.data(), m.layers()[l].weights.data());
            expect_same_bits(back.layers()[l].bias, m.layers()[l].bias);
        }
        expect_same_bits(back.standardization().input_mean, m.standardization().input_mean);
        expect_same_bits(back.standardization().input_scale, m.standardization().input_scale);
        expect_same_bits({back.standardization().target_scale}, {m.standardization().target_scale});
        expect_same_bits(back.training_log(), m.training_log());
        EXPECT_EQ(back.final_nll(), m.final_nll());
        EXPECT_EQ(serialize_model(back), serialize_model(m));
    }
}

TEST(ModelIo, SaveLoadThroughFile) {
    Rng rng(2);
    const auto m = check::random_model(rng, 2, 2, 3, HiddenActivation::tanh);
    const auto path = temp_path("model.json");
    save_model(m, path);
    const auto back = load_model(path);
    EXPECT_EQ(serialize_model(back), serialize_model(m));
    std::filesystem::remove(path);
}

TEST(ModelIo, UntrainedModelKeepsNaNFinalNll) {
    Rng rng(3);
    const auto m = check::random_model(rng, 1, 1, 1, HiddenActivation::tanh);
    const auto j = model_to_json(m);
    EXPECT_TRUE(j.at("final_nll").is_null());
    EXPECT_TRUE(std::isnan(model_from_json(j).final_nll()));
}

TEST(ModelIo, RejectsForeignOrBrokenDocuments) {
    Rng rng(4);
    auto j = model_to_json(check::random_model(rng, 1, 1, 1, HiddenActivation::tanh));
    auto wrong_version = j;
    wrong_version["version"] = 99;
    EXPECT_THROW(model_from_json(wrong_version), FormatError);
    auto wrong_format = j;
    wrong_format["format"] = "something-else";
    EXPECT_THROW(model_from_json(wrong_format), FormatError);
    auto missing = j;
    missing.erase("layers");
    EXPECT_THROW(model_from_json(missing), FormatError);
    auto bad_shape = j;
    bad_shape["layers"][0]["rows"] = 1000;
    EXPECT_THROW(model_from_json(bad_shape), Error);

    EXPECT_THROW(load_model(temp_path("does_not_exist.json")), IoError);
    const auto path = temp_path("garbage.json");
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_model(path), FormatError);
    std::filesystem::remove(path);
}

TEST(ConfigIo, PartialOverrideAndOptimizerForms) {
    MdnConfig base;
    base.n_components = 4;
    const auto c = config_from_json(nlohmann::json::parse(R"({"epochs": 12, "optimizer": "sgd"})"), base);
    EXPECT_EQ(c.epochs, 12u);
    EXPECT_EQ(c.n_components, 4u);
    EXPECT_EQ(c.optimizer, OptimizerKind::sgd);
    const auto d = config_from_json(
        nlohmann::json::parse(R"({"optimizer": {"kind": "adam", "beta1": 0.8}, "hidden_activation": "relu"})"));
    EXPECT_EQ(d.optimizer, OptimizerKind::adam);
    EXPECT_EQ(d.adam.beta1, 0.8);
    EXPECT_EQ(d.hidden_activation, HiddenActivation::relu);
    EXPECT_EQ(config_from_json(config_to_json(c)), c);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"optimizer": "rmsprop"})")), FormatError);
}
