#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "hmdn/dataio.hpp"

using namespace hmdn;

namespace {

std::string data_file(const std::string& name) { return std::string(HMDN_TEST_DATA_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hmdn_test_" + name)).string();
}

}  // namespace

TEST(LoadCsv, SmallFixture) {
    const auto t = load_csv(data_file("fingerprints_small.csv"));
    EXPECT_EQ(t.n_records(), 3u);
    EXPECT_EQ(t.n_waps(), 4u);
    EXPECT_EQ(t.rssi(0, 0), -45.0);
    EXPECT_EQ(t.coords(2, 1), 4864949.2);
    EXPECT_EQ(t.meta_names, (std::vector<std::string>{"FLOOR", "BUILDINGID"}));
    EXPECT_EQ(t.meta[2][0], "3");
}

TEST(LoadCsv, SentinelExcludedFromStats) {
    const auto s = load_csv(data_file("fingerprints_small.csv")).rssi_stats();
    EXPECT_EQ(s.n_missing, 3u);
    EXPECT_EQ(s.n_detected, 9u);
    EXPECT_EQ(s.min, -104.0);
    EXPECT_EQ(s.max, 0.0);
}

TEST(LoadCsv, MalformedCellNamesRowAndColumn) {
    try {
        load_csv(data_file("fingerprints_malformed.csv"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_EQ(e.column(), "WAP003");
        EXPECT_NE(std::string(e.what()).find("row 2, column \"WAP003\""), std::string::npos) << e.what();
    }
}

TEST(LoadCsv, MissingColumnIsSchemaError) {
    CsvSchema schema;
    schema.wap_columns = {"WAP001", "WAP009"};
    try {
        load_csv(data_file("fingerprints_small.csv"), schema);
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("WAP009"), std::string::npos);
    }
    std::istringstream no_coords("WAP001,X\n-50,1\n");
    EXPECT_THROW(read_csv(no_coords, {}), SchemaError);
    EXPECT_THROW(load_csv(temp_path("missing.csv")), IoError);
}

TEST(LoadCsv, ExplicitColumnsSubsetWaps) {
    CsvSchema schema;
    schema.wap_columns = {"WAP003", "WAP001"};
    const auto t = load_csv(data_file("fingerprints_small.csv"), schema);
    EXPECT_EQ(t.n_waps(), 2u);
    EXPECT_EQ(t.rssi(2, 0), -55.0);
    EXPECT_EQ(t.rssi(2, 1), -104.0);
}

TEST(LoadCsv, OutOfRangeRssiRejected) {
    std::istringstream in("WAP001,LONGITUDE,LATITUDE\n-20,0,0\n5,0,0\n");
    try {
        read_csv(in, {});
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_EQ(e.column(), "WAP001");
    }
}

TEST(LoadCsv, QuotedFieldsAndCrlf) {
    std::istringstream in("WAP001,LONGITUDE,LATITUDE,NOTE\r\n-20,1.5,2.5,\"a, \"\"b\"\"\"\r\n");
    const auto t = read_csv(in, {});
    EXPECT_EQ(t.n_records(), 1u);
    EXPECT_EQ(t.meta[0][0], "a, \"b\"");
    EXPECT_EQ(t.coords(0, 1), 2.5);
}

TEST(LoadCsv, UjiLayoutExcerpt) {
    const auto t = load_csv(data_file("uji_excerpt_synthetic.csv"));
    EXPECT_EQ(t.n_records(), 50u);
    EXPECT_EQ(t.n_waps(), 520u);
    EXPECT_EQ(t.wap_names.front(), "WAP001");
    EXPECT_EQ(t.wap_names.back(), "WAP520");
    EXPECT_GT(t.rssi_stats().n_missing, t.rssi_stats().n_detected);
}

TEST(Csv, SaveLoadRoundTrip) {
    Rng rng(1);
    const Scene scene = [] {
        Scene s = paper_room_scene();
        s.illuminance_noise = true;
        return s;
    }();
    const auto t = table_from_records(scene, generate_dataset(scene, 25, rng));
    const auto path = temp_path("roundtrip.csv");
    save_csv(t, path);
    const auto back = load_csv(path);
    EXPECT_EQ(back.wap_names, t.wap_names);
    EXPECT_EQ(back.rssi, t.rssi);
    EXPECT_EQ(back.coords, t.coords);
    EXPECT_EQ(back.lux_names, t.lux_names);
    EXPECT_EQ(back.lux, t.lux);
    EXPECT_EQ(back.lux_noisy, t.lux_noisy);
    EXPECT_EQ(back.meta, t.meta);
    std::ostringstream a, b;
    write_csv(a, t);
    write_csv(b, back);
    EXPECT_EQ(a.str(), b.str());
    std::filesystem::remove(path);

    const auto uji = load_csv(data_file("uji_excerpt_synthetic.csv"));
    std::stringstream ss;
    write_csv(ss, uji);
    const auto uji_back = read_csv(ss, {});
    EXPECT_EQ(uji_back.rssi, uji.rssi);
    EXPECT_EQ(uji_back.coords, uji.coords);
    EXPECT_EQ(uji_back.meta, uji.meta);
}

TEST(Normalize, Endpoints) {
    const auto n = make_normalization(RssiNormalizationMode::zero_one);
    EXPECT_EQ(n.forward(0.0), 1.0);
    EXPECT_NEAR(n.forward(-104.0), 1.0 / 105.0, 1e-15);
    EXPECT_GT(n.forward(-104.0), 0.0);
    EXPECT_EQ(n.forward(100.0), 0.0);
    const auto p = make_normalization(RssiNormalizationMode::powed);
    EXPECT_EQ(p.forward(100.0), 0.0);
    EXPECT_NEAR(p.forward(0.0), 1.0, 1e-15);
}

TEST(Normalize, InverseAndMonotone) {
    for (auto mode : {RssiNormalizationMode::zero_one, RssiNormalizationMode::powed}) {
        const auto n = make_normalization(mode);
        double prev = 0.0;
        for (double v = -104.0; v <= 0.0; v += 0.5) {
            const double f = n.forward(v);
            EXPECT_GT(f, prev);
            EXPECT_NEAR(n.inverse(f), v, 1e-12);
            prev = f;
        }
    }
}

TEST(Normalize, TableFeatures) {
    const auto t = load_csv(data_file("fingerprints_small.csv"));
    const auto f = normalize_rssi(t, RssiNormalizationMode::zero_one);
    EXPECT_EQ(f.features.rows(), 3u);
    EXPECT_EQ(f.features(0, 2), 0.0);
    EXPECT_EQ(f.features(2, 3), 1.0);
    EXPECT_NEAR(f.features(0, 0), (-45.0 + 105.0) / 105.0, 1e-15);
}

TEST(Split, FractionsAndPartition) {
    const auto s = split(100, {0.8, 7, SplitStrategy::random});
    EXPECT_EQ(s.train_indices.size(), 80u);
    EXPECT_EQ(s.test_indices.size(), 20u);
    std::vector<int> seen(100, 0);
    for (auto i : s.train_indices) ++seen[i];
    for (auto i : s.test_indices) ++seen[i];
    for (int c : seen) EXPECT_EQ(c, 1);
    const auto again = split(100, {0.8, 7, SplitStrategy::random});
    EXPECT_EQ(again.train_indices, s.train_indices);
    const auto other = split(100, {0.8, 8, SplitStrategy::random});
    EXPECT_NE(other.train_indices, s.train_indices);
    const auto ordered = split(10, {0.3, 0, SplitStrategy::by_record_order});
    EXPECT_EQ(ordered.train_indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Split, RejectsDegenerateFractions) {
    EXPECT_THROW(split(100, {1.0, 0}), ArgumentError);
    EXPECT_THROW(split(100, {0.0, 0}), ArgumentError);
    EXPECT_THROW(split(0, {0.5, 0}), ArgumentError);
}

TEST(Split, PartitionPropertyOnRandomSizes) {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.index(500);
        const double frac = rng.uniform(0.01, 0.99);
        const auto s = split(n, {frac, rng.next_u64()});
        std::vector<std::size_t> all = s.train_indices;
        all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
        std::sort(all.begin(), all.end());
        ASSERT_EQ(all.size(), n);
        for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(all[i], i);
    }
}

TEST(Split, TablesFollowIndices) {
    const auto t = load_csv(data_file("uji_excerpt_synthetic.csv"));
    const auto [train, test] = split(t, {0.8, 3});
    EXPECT_EQ(train.n_records(), 40u);
    EXPECT_EQ(test.n_records(), 10u);
    EXPECT_EQ(train.n_waps(), 520u);
}

TEST(Augment, AddsSceneIlluminanceAndLabels) {
    const Scene s = paper_room_scene();
    std::istringstream in(
        "WAP001,LONGITUDE,LATITUDE,FLOOR\n-50,-7541.25,4864921.5,2\n-60,-7530.0,4864929.0,2\n100,-7528.5,4864925.0,2\n");
    const auto t = read_csv(in, {});
    const std::vector<double> origin{-7545.0, 4864920.0};
    const auto a = augment_with_illuminance(t, s, origin);
    EXPECT_EQ(a.lux_names, (std::vector<std::string>{"sunny", "cloudy", "night_lights"}));
    for (std::size_t r = 0; r < 3; ++r) {
        const std::vector<double> pos{t.coords(r, 0) - origin[0], t.coords(r, 1) - origin[1]};
        EXPECT_EQ(a.lux(r, 0), illuminance_at(s, pos, ConditionKind::sunny));
        EXPECT_EQ(a.meta[r].back(), "augmented");
    }
    const std::vector<double> far_origin{0.0, 0.0};
    EXPECT_THROW(augment_with_illuminance(t, s, far_origin), DomainError);
}
