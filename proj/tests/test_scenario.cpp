#include <cmath>

#include <gtest/gtest.h>

#include "hmdn/scenario.hpp"

using namespace hmdn;

namespace {

Scene single_light_scene(Point3 light, double intensity, double ambient = 0.0) {
    Scene s;
    s.conditions = {{ConditionKind::sunny, ambient}};
    s.lights = {{light, LightKind::ceiling_point, {intensity}}};
    s.access_points = {{{0.0, 0.0, 1.5}, -40.0, 2.0, 0.0}};
    return s;
}

// Irradiance from the vector geometry: E = I (n . v) / |v|^3 with n the upward
// normal of the measurement plane and v the vector from the point to the light.
double oracle_lux(const Scene& s, double x, double y, std::size_t ci) {
    double lux = s.conditions[ci].ambient;
    for (const auto& l : s.lights) {
        const double v[3] = {l.position[0] - x, l.position[1] - y, l.position[2] - s.phone_height};
        const double len = std::hypot(v[0], v[1], v[2]);
        const double n_dot_v = v[2];
        if (n_dot_v > 0) lux += l.intensity[ci] * n_dot_v / (len * len * len);
    }
    return lux;
}

}  // namespace

TEST(Illuminance, AmbientOnlyWhenLightsAreOff) {
    auto s = single_light_scene({3, 3, 4}, 0.0, 123.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> p{rng.uniform(0, 17), rng.uniform(0, 10)};
        EXPECT_EQ(illuminance_at(s, p, ConditionKind::sunny), 123.0);
    }
}

TEST(Illuminance, OnAxisInverseSquare) {
    const auto s = single_light_scene({4, 5, 4.0}, 1000.0);
    const double h = 4.0 - 1.5;
    EXPECT_NEAR(illuminance_at(s, std::vector<double>{4, 5}, ConditionKind::sunny), 1000.0 / (h * h), 1e-12);
}

TEST(Illuminance, OffAxisMatchesVectorForm) {
    const Scene s = paper_room_scene();
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(0, 17), y = rng.uniform(0, 10);
        for (std::size_t c = 0; c < s.conditions.size(); ++c) {
            const double got = illuminance_at(s, std::vector<double>{x, y}, s.conditions[c].kind);
            EXPECT_NEAR(got, oracle_lux(s, x, y, c), 1e-10 * got);
        }
    }
}

TEST(Illuminance, AtLeastAmbientAndDecreasingAwayFromLight) {
    const auto s = single_light_scene({2, 5, 4.0}, 2000.0, 10.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double x = 2.0; x <= 17.0; x += 0.25) {
        const double e = illuminance_at(s, std::vector<double>{x, 5.0}, ConditionKind::sunny);
        EXPECT_GE(e, 10.0);
        if (x > 2.0) {
            EXPECT_LT(e, prev);
        }
        prev = e;
    }
}

TEST(Illuminance, OutsideRoomIsDomainError) {
    const Scene s = paper_room_scene();
    EXPECT_THROW(illuminance_at(s, std::vector<double>{17.5, 1}, ConditionKind::sunny), DomainError);
    EXPECT_THROW(illuminance_at(s, std::vector<double>{1, -0.1}, ConditionKind::sunny), DomainError);
    Rng rng(3);
    EXPECT_THROW(rssi_at(s, std::vector<double>{-1, 1}, rng), DomainError);
}

TEST(Rssi, ReferenceDistanceGivesTxPower) {
    Scene s = single_light_scene({0, 0, 4}, 0.0);
    s.access_points = {{{5.0, 5.0, 2.5}, -37.0, 2.0, 0.0}};  // 1 m above the phone plane
    Rng rng(4);
    EXPECT_NEAR(rssi_at(s, std::vector<double>{5, 5}, rng)[0], -37.0, 1e-12);
}

TEST(Rssi, DoublingDistanceCostsSixDecibels) {
    Scene s = single_light_scene({0, 0, 4}, 0.0);
    s.access_points = {{{1.0, 5.0, 1.5}, -40.0, 2.0, 0.0}};
    Rng rng(5);
    const double near = rssi_at(s, std::vector<double>{3, 5}, rng)[0];
    const double far = rssi_at(s, std::vector<double>{5, 5}, rng)[0];
    EXPECT_NEAR(near - far, 20.0 * std::log10(2.0), 1e-12);
    EXPECT_NEAR(near - far, 6.02, 1e-3);
}

TEST(Rssi, ShadowingSpread) {
    Scene s = single_light_scene({0, 0, 4}, 0.0);
    s.access_points = {{{8.0, 5.0, 3.0}, -40.0, 3.0, 4.0}};
    Rng rng(6);
    const int n = 10000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double v = rssi_at(s, std::vector<double>{6, 4}, rng)[0];
        sum += v;
        sum2 += v * v;
    }
    const double m = sum / n;
    const double sd = std::sqrt(sum2 / n - m * m);
    EXPECT_GE(sd, 3.8);
    EXPECT_LE(sd, 4.2);
}

TEST(Rssi, NonIncreasingWithDistanceAndSentinelBelowThreshold) {
    Scene s = single_light_scene({0, 0, 4}, 0.0);
    s.access_points = {{{0.0, 5.0, 1.5}, -30.0, 6.0, 0.0}};
    Rng rng(7);
    double prev = 1.0;
    bool saw_sentinel = false;
    for (double x = 0.0; x <= 17.0; x += 0.5) {
        const double v = rssi_at(s, std::vector<double>{x, 5}, rng)[0];
        if (v == s.not_detected) {
            saw_sentinel = true;
            continue;
        }
        EXPECT_FALSE(saw_sentinel) << "detected again after dropping out at x=" << x;
        EXPECT_LE(v, prev);
        EXPECT_GE(v, s.detection_threshold);
        EXPECT_LE(v, 0.0);
        prev = v;
    }
    EXPECT_TRUE(saw_sentinel);
}

TEST(Rssi, PaperRoomIsMirrorSymmetric) {
    Scene s = paper_room_scene();
    for (auto& ap : s.access_points) ap.shadow_sigma = 0.0;
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(0, 17), y = rng.uniform(0, 10);
        const auto a = rssi_at(s, std::vector<double>{x, y}, rng);
        const auto b = rssi_at(s, std::vector<double>{17 - x, y}, rng);
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
        // The window breaks the symmetry for daylight conditions.
        if (std::abs(x - 8.5) > 1.0) {
            EXPECT_NE(illuminance_at(s, std::vector<double>{x, y}, ConditionKind::sunny),
                      illuminance_at(s, std::vector<double>{17 - x, y}, ConditionKind::sunny));
        }
    }
}

TEST(Dataset, BoundsCountAndDeterminism) {
    const Scene s = paper_room_scene();
    Rng a(9), b(9);
    const auto d1 = generate_dataset(s, 100, a);
    const auto d2 = generate_dataset(s, 100, b);
    ASSERT_EQ(d1.size(), 100u);
    for (std::size_t i = 0; i < d1.size(); ++i) {
        EXPECT_EQ(d1[i].position, d2[i].position);
        EXPECT_EQ(d1[i].rssi, d2[i].rssi);
        EXPECT_EQ(d1[i].lux, d2[i].lux);
        EXPECT_GE(d1[i].position[0], 0.0);
        EXPECT_LE(d1[i].position[0], 17.0);
        EXPECT_GE(d1[i].position[1], 0.0);
        EXPECT_LE(d1[i].position[1], 10.0);
        EXPECT_EQ(d1[i].lux.size(), 3u);
        EXPECT_FALSE(d1[i].lux_noisy.has_value());
    }
    Rng c(10);
    EXPECT_THROW(generate_dataset(s, 0, c), ArgumentError);
}

TEST(Dataset, PositionsUniformOnGrid) {
    const Scene s = paper_room_scene();
    Rng rng(11);
    const std::size_t n = 10000;
    const auto d = generate_dataset(s, n, rng);
    std::vector<double> counts(16, 0.0);
    for (const auto& r : d) {
        const auto gx = std::min<std::size_t>(3, static_cast<std::size_t>(r.position[0] / 17.0 * 4));
        const auto gy = std::min<std::size_t>(3, static_cast<std::size_t>(r.position[1] / 10.0 * 4));
        counts[gx * 4 + gy] += 1;
    }
    const double expected = static_cast<double>(n) / 16.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // chi-square 99th percentile, 15 degrees of freedom
    EXPECT_LT(chi2, 30.578);
}

TEST(Dataset, NoisyIlluminanceWhenEnabled) {
    Scene s = paper_room_scene();
    s.illuminance_noise = true;
    Rng rng(12);
    const auto d = generate_dataset(s, 2000, rng);
    double z2 = 0.0;
    for (const auto& r : d) {
        ASSERT_TRUE(r.lux_noisy.has_value());
        for (std::size_t c = 0; c < r.lux.size(); ++c) {
            const double z = ((*r.lux_noisy)[c] - r.lux[c]) / illuminance_noise_sigma(r.lux[c]);
            z2 += z * z;
        }
    }
    EXPECT_NEAR(z2 / (2000.0 * 3.0), 1.0, 0.05);
}

TEST(SceneFile, ShippedPaperRoomMatchesBuiltIn) {
    const Scene shipped = load_scene(std::string(HMDN_SCENE_DIR) + "/scene_paper_room.json");
    EXPECT_EQ(scene_to_json(shipped), scene_to_json(paper_room_scene()));
    EXPECT_EQ(shipped.room_width, 17.0);
    EXPECT_EQ(shipped.room_depth, 10.0);
    EXPECT_EQ(shipped.phone_height, 1.5);
    EXPECT_EQ(shipped.ceiling_height, 4.0);
}

TEST(SceneFile, NullSceneHasConstantIlluminance) {
    const Scene s = load_scene(std::string(HMDN_SCENE_DIR) + "/scene_null_constant.json");
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> p{rng.uniform(0, 17), rng.uniform(0, 10)};
        for (const auto& c : s.conditions) EXPECT_EQ(illuminance_at(s, p, c.kind), 300.0);
    }
}

TEST(SceneFile, JsonRoundTripAndValidation) {
    Scene s = paper_room_scene();
    s.illuminance_noise = true;
    const Scene back = scene_from_json(scene_to_json(s));
    EXPECT_EQ(scene_to_json(back), scene_to_json(s));
    auto j = scene_to_json(s);
    j["room"]["phone_height"] = 5.0;
    EXPECT_THROW(scene_from_json(j), Error);
    EXPECT_EQ(parse_condition("night_lights"), ConditionKind::night_lights);
    EXPECT_THROW(parse_condition("foggy"), Error);
}
