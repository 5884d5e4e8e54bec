// Synthetic indoor scene: point-source illuminance on the phone plane under
// several lighting conditions and log-distance WLAN fingerprints.
//
// Coordinates: x in [0, room_width], y in [0, room_depth], z up from the floor.
// Measurements are taken on the horizontal plane z = phone_height.
#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmdn/numcore.hpp"

namespace hmdn {

enum class ConditionKind { sunny, cloudy, night_lights };

inline const char* condition_name(ConditionKind c) {
    switch (c) {
        case ConditionKind::sunny: return "sunny";
        case ConditionKind::cloudy: return "cloudy";
        case ConditionKind::night_lights: return "night_lights";
    }
    return "?";
}

inline ConditionKind parse_condition(const std::string& s) {
    if (s == "sunny") return ConditionKind::sunny;
    if (s == "cloudy") return ConditionKind::cloudy;
    if (s == "night_lights") return ConditionKind::night_lights;
    throw ArgumentError("unknown lighting condition '" + s + "'");
}

using Point3 = std::array<double, 3>;

struct Condition {
    ConditionKind kind = ConditionKind::sunny;
    double ambient = 0.0;  // lux
};

enum class LightKind { window_point, ceiling_point };

struct LightSource {
    Point3 position{};
    LightKind kind = LightKind::ceiling_point;
    // Luminous intensity in candela, one entry per scene condition (same order).
    std::vector<double> intensity;
};

struct AccessPoint {
    Point3 position{};
    double tx_power = -40.0;  // dBm at 1 m
    double path_loss_exponent = 3.0;
    double shadow_sigma = 0.0;  // dB
};

struct Scene {
    std::string name = "scene";
    double room_width = 17.0;
    double room_depth = 10.0;
    double phone_height = 1.5;
    double ceiling_height = 4.0;
    std::vector<Condition> conditions;
    std::vector<LightSource> lights;
    std::vector<AccessPoint> access_points;
    // Readings below this are reported as not detected.
    double detection_threshold = -95.0;
    double not_detected = 100.0;
    bool illuminance_noise = false;

    std::size_t condition_index(ConditionKind c) const {
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            if (conditions[i].kind == c) return i;
        }
        throw ArgumentError(std::string("scene '") + name + "' has no condition " + condition_name(c));
    }

    void validate() const {
        if (!(room_width > 0 && room_depth > 0 && phone_height > 0 && ceiling_height > 0)) {
            throw ArgumentError("scene: all lengths must be positive");
        }
        if (!(phone_height < ceiling_height)) throw ArgumentError("scene: phone_height must be below the ceiling");
        if (lights.empty()) throw ArgumentError("scene: at least one light source is required");
        if (access_points.empty()) throw ArgumentError("scene: at least one access point is required");
        if (conditions.empty()) throw ArgumentError("scene: at least one condition is required");
        for (const auto& c : conditions) {
            if (!(c.ambient >= 0.0)) throw ArgumentError("scene: ambient must be non-negative");
        }
        for (const auto& l : lights) {
            if (l.intensity.size() != conditions.size()) {
                throw ArgumentError("scene: each light needs one intensity per condition");
            }
            for (double i : l.intensity) {
                if (!(i >= 0.0)) throw ArgumentError("scene: light intensity must be non-negative");
            }
        }
        for (const auto& ap : access_points) {
            if (!(ap.path_loss_exponent > 0.0)) throw ArgumentError("scene: path_loss_exponent must be positive");
            if (!(ap.shadow_sigma >= 0.0)) throw ArgumentError("scene: shadow_sigma must be non-negative");
        }
    }
};

/// The 17 x 10 m room with a 1.5 m phone plane and a 4 m ceiling. A window source
/// sits mid-wall on x = 0; two ceiling lamps in the left half are lit at night.
/// The four access points lie on the mirror line x = 8.5, so (x, y) and
/// (17 - x, y) share the same expected fingerprint.
inline Scene paper_room_scene() {
    Scene s;
    s.name = "scene_paper_room";
    s.conditions = {{ConditionKind::sunny, 200.0}, {ConditionKind::cloudy, 300.0}, {ConditionKind::night_lights, 5.0}};
    s.lights = {
        {{0.0, 5.0, 3.5}, LightKind::window_point, {5000.0, 800.0, 0.0}},
        {{3.5, 2.5, 4.0}, LightKind::ceiling_point, {0.0, 0.0, 1200.0}},
        {{5.5, 7.5, 4.0}, LightKind::ceiling_point, {0.0, 0.0, 1200.0}},
    };
    for (double y : {1.0, 3.7, 6.3, 9.0}) {
        s.access_points.push_back({{8.5, y, 3.0}, -40.0, 3.0, 2.0});
    }
    return s;
}

namespace detail {

inline void check_in_room(const Scene& scene, std::span<const double> pos) {
    if (pos.size() != 2) throw ShapeError("scene position must be 2D");
    if (!(pos[0] >= 0.0 && pos[0] <= scene.room_width && pos[1] >= 0.0 && pos[1] <= scene.room_depth)) {
        throw DomainError("position (" + std::to_string(pos[0]) + ", " + std::to_string(pos[1]) +
                          ") lies outside the " + std::to_string(scene.room_width) + " x " +
                          std::to_string(scene.room_depth) + " m room");
    }
}

}  // namespace detail

/// ambient + sum over lights of I * cos(theta) / r^2 on the phone plane, where
/// cos(theta) = (light height above the plane) / r. Lights at or below the plane
/// contribute nothing.
inline double illuminance_at(const Scene& scene, std::span<const double> pos, ConditionKind condition) {
    detail::check_in_room(scene, pos);
    const std::size_t ci = scene.condition_index(condition);
    double lux = scene.conditions[ci].ambient;
    for (const auto& light : scene.lights) {
        const double dx = light.position[0] - pos[0];
        const double dy = light.position[1] - pos[1];
        const double dz = light.position[2] - scene.phone_height;
        if (dz <= 0.0) continue;
        const double r2 = dx * dx + dy * dy + dz * dz;
        const double cos_theta = dz / std::sqrt(r2);
        lux += light.intensity[ci] * cos_theta / r2;
    }
    return lux;
}

/// Measurement-noise standard deviation for an illuminance reading.
inline double illuminance_noise_sigma(double lux) { return 0.02 * lux + 1.0; }

/// Log-distance path loss with Gaussian shadowing, one reading per access point:
/// tx - 10 n log10(max(d, 0.1 m)) + N(0, shadow^2), d the 3D distance to the
/// phone. Readings below the detection threshold become the not-detected
/// sentinel; readings above 0 dBm are clipped to 0.
inline Vector rssi_at(const Scene& scene, std::span<const double> pos, Rng& rng) {
    detail::check_in_room(scene, pos);
    Vector out(scene.access_points.size());
    for (std::size_t a = 0; a < out.size(); ++a) {
        const auto& ap = scene.access_points[a];
        const double dx = ap.position[0] - pos[0];
        const double dy = ap.position[1] - pos[1];
        const double dz = ap.position[2] - scene.phone_height;
        const double d = std::max(std::sqrt(dx * dx + dy * dy + dz * dz), 0.1);
        double v = ap.tx_power - 10.0 * ap.path_loss_exponent * std::log10(d);
        if (ap.shadow_sigma > 0.0) v += ap.shadow_sigma * rng.normal();
        if (v < scene.detection_threshold) {
            v = scene.not_detected;
        } else if (v > 0.0) {
            v = 0.0;
        }
        out[a] = v;
    }
    return out;
}

struct ScenarioRecord {
    Vector position;  // 2D
    Vector rssi;      // one per access point
    Vector lux;       // noiseless, one per scene condition
    std::optional<Vector> lux_noisy;
};

/// Uniform positions over the floor. Per record the stream is consumed as:
/// x, y, one shadowing normal per access point (when shadow_sigma > 0), then one
/// noise normal per condition when the scene enables illuminance noise.
inline std::vector<ScenarioRecord> generate_dataset(const Scene& scene, std::size_t n_points, Rng& rng) {
    scene.validate();
    if (n_points < 1) throw ArgumentError("generate_dataset: n_points must be >= 1");
    std::vector<ScenarioRecord> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        ScenarioRecord r;
        const double x = rng.uniform(0.0, scene.room_width);
        const double y = rng.uniform(0.0, scene.room_depth);
        r.position = {x, y};
        r.rssi = rssi_at(scene, r.position, rng);
        r.lux.reserve(scene.conditions.size());
        for (const auto& c : scene.conditions) r.lux.push_back(illuminance_at(scene, r.position, c.kind));
        if (scene.illuminance_noise) {
            Vector noisy(r.lux.size());
            for (std::size_t c = 0; c < r.lux.size(); ++c) {
                noisy[c] = r.lux[c] + illuminance_noise_sigma(r.lux[c]) * rng.normal();
            }
            r.lux_noisy = std::move(noisy);
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scene files (JSON). Schema: docs/formats.md.

inline nlohmann::json scene_to_json(const Scene& s) {
    nlohmann::json j;
    j["format"] = "hmdn-scene";
    j["version"] = 1;
    j["name"] = s.name;
    j["room"] = {{"width", s.room_width},
                 {"depth", s.room_depth},
                 {"phone_height", s.phone_height},
                 {"ceiling_height", s.ceiling_height}};
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : s.conditions) conds.push_back({{"name", condition_name(c.kind)}, {"ambient", c.ambient}});
    j["conditions"] = conds;
    nlohmann::json lights = nlohmann::json::array();
    for (const auto& l : s.lights) {
        nlohmann::json intensity = nlohmann::json::object();
        for (std::size_t c = 0; c < s.conditions.size(); ++c) {
            intensity[condition_name(s.conditions[c].kind)] = l.intensity[c];
        }
        lights.push_back({{"kind", l.kind == LightKind::window_point ? "window_point" : "ceiling_point"},
                          {"position", l.position},
                          {"intensity", intensity}});
    }
    j["lights"] = lights;
    nlohmann::json aps = nlohmann::json::array();
    for (const auto& a : s.access_points) {
        aps.push_back({{"position", a.position},
                       {"tx_power", a.tx_power},
                       {"path_loss_exponent", a.path_loss_exponent},
                       {"shadow_sigma", a.shadow_sigma}});
    }
    j["access_points"] = aps;
    j["rssi"] = {{"detection_threshold", s.detection_threshold}, {"not_detected", s.not_detected}};
    j["illuminance_noise"] = s.illuminance_noise;
    return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    try {
        s.name = j.value("name", std::string("scene"));
        const auto& room = j.at("room");
        s.room_width = room.at("width");
        s.room_depth = room.at("depth");
        s.phone_height = room.at("phone_height");
        s.ceiling_height = room.at("ceiling_height");
        for (const auto& c : j.at("conditions")) {
            s.conditions.push_back({parse_condition(c.at("name")), c.at("ambient")});
        }
        for (const auto& lj : j.at("lights")) {
            LightSource l;
            const std::string kind = lj.at("kind");
            if (kind == "window_point") {
                l.kind = LightKind::window_point;
            } else if (kind == "ceiling_point") {
                l.kind = LightKind::ceiling_point;
            } else {
                throw ArgumentError("scene: unknown light kind '" + kind + "'");
            }
            l.position = lj.at("position");
            const auto& intensity = lj.at("intensity");
            for (const auto& c : s.conditions) l.intensity.push_back(intensity.value(condition_name(c.kind), 0.0));
            s.lights.push_back(std::move(l));
        }
        for (const auto& aj : j.at("access_points")) {
            s.access_points.push_back({aj.at("position"), aj.at("tx_power"), aj.at("path_loss_exponent"),
                                       aj.value("shadow_sigma", 0.0)});
        }
        if (j.contains("rssi")) {
            s.detection_threshold = j["rssi"].value("detection_threshold", s.detection_threshold);
            s.not_detected = j["rssi"].value("not_detected", s.not_detected);
        }
        s.illuminance_noise = j.value("illuminance_noise", false);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("malformed scene document: ") + e.what());
    }
    s.validate();
    return s;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError("scene file " + path + " is not valid JSON: " + e.what());
    }
    return scene_from_json(j);
}

inline void save_scene(const Scene& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open scene file for writing: " + path);
    out << scene_to_json(s).dump(2) << "\n";
}

}  // namespace hmdn
