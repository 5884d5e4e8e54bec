// UJIIndoorLoc-style fingerprint tables: CSV ingestion and export, RSSI
// normalization, train/test splitting, and conversion of synthetic scenario
// records into the same table layout.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hmdn/numcore.hpp"
#include "hmdn/scenario.hpp"

namespace hmdn {

class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell failed to parse or validate. Rows count data rows from 1 (the header
/// is not counted).
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& what)
        : Error("row " + std::to_string(row) + ", column \"" + column + "\": " + what),
          row_(row),
          column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

struct CsvSchema {
    // Explicit WAP columns; when empty every header column named <wap_prefix><digits> is used.
    std::vector<std::string> wap_columns;
    std::string wap_prefix = "WAP";
    std::string x_column = "LONGITUDE";
    std::string y_column = "LATITUDE";
    std::string lux_prefix = "LUX_";
    std::string noisy_lux_prefix = "LUXN_";
    double not_detected = 100.0;
    double rssi_floor = -104.0;
};

struct RssiStats {
    std::size_t n_detected = 0;
    std::size_t n_missing = 0;
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

struct FingerprintTable {
    std::vector<std::string> wap_names;
    Matrix rssi;    // n_records x n_waps, dBm or the not-detected sentinel
    Matrix coords;  // n_records x 2
    std::vector<std::string> lux_names;  // condition names, without prefix
    Matrix lux;                          // n_records x lux_names.size()
    Matrix lux_noisy;                    // n_records x lux_names.size(), or empty
    std::vector<std::string> meta_names;
    std::vector<std::vector<std::string>> meta;  // n_records x meta_names.size()
    double not_detected = 100.0;

    std::size_t n_records() const noexcept { return coords.rows(); }
    std::size_t n_waps() const noexcept { return wap_names.size(); }

    bool is_detected(double v) const noexcept { return v != not_detected; }

    /// Min/max over detected readings only.
    RssiStats rssi_stats() const {
        RssiStats s;
        for (double v : rssi.data()) {
            if (!is_detected(v)) {
                ++s.n_missing;
                continue;
            }
            if (s.n_detected == 0 || v < s.min) s.min = v;
            if (s.n_detected == 0 || v > s.max) s.max = v;
            ++s.n_detected;
        }
        return s;
    }

    std::size_t lux_index(const std::string& condition) const {
        for (std::size_t i = 0; i < lux_names.size(); ++i) {
            if (lux_names[i] == condition) return i;
        }
        throw SchemaError("table has no illuminance column for condition '" + condition + "'");
    }

    Vector position(std::size_t i) const { return {coords(i, 0), coords(i, 1)}; }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(std::move(cell));
    return out;
}

inline std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline bool has_digit_suffix(const std::string& name, const std::string& prefix) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return false;
    for (std::size_t i = prefix.size(); i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return false;
    }
    return true;
}

inline bool starts_with(const std::string& s, const std::string& prefix) {
    return !prefix.empty() && s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

inline std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace detail

/// 17 significant digits; parses back to the same double.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Streams one row at a time. Columns not claimed by the schema are kept as
/// opaque metadata strings.
inline FingerprintTable read_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("CSV input is empty; a header row is required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = detail::split_csv_line(line);

    auto find_column = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw SchemaError("missing column \"" + name + "\"");
    };

    FingerprintTable t;
    t.not_detected = schema.not_detected;
    std::vector<std::size_t> wap_idx;
    if (!schema.wap_columns.empty()) {
        for (const auto& name : schema.wap_columns) {
            wap_idx.push_back(find_column(name));
            t.wap_names.push_back(name);
        }
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (detail::has_digit_suffix(header[i], schema.wap_prefix)) {
                wap_idx.push_back(i);
                t.wap_names.push_back(header[i]);
            }
        }
        if (wap_idx.empty()) throw SchemaError("no columns named " + schema.wap_prefix + "<number> in header");
    }
    const std::size_t x_idx = find_column(schema.x_column);
    const std::size_t y_idx = find_column(schema.y_column);

    std::vector<std::size_t> lux_idx, noisy_idx, meta_idx;
    std::vector<bool> claimed(header.size(), false);
    for (auto i : wap_idx) claimed[i] = true;
    claimed[x_idx] = claimed[y_idx] = true;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (claimed[i]) continue;
        if (detail::starts_with(header[i], schema.lux_prefix)) {
            lux_idx.push_back(i);
            t.lux_names.push_back(header[i].substr(schema.lux_prefix.size()));
        } else if (detail::starts_with(header[i], schema.noisy_lux_prefix)) {
            noisy_idx.push_back(i);
        } else {
            meta_idx.push_back(i);
            t.meta_names.push_back(header[i]);
        }
    }
    if (!noisy_idx.empty()) {
        if (noisy_idx.size() != lux_idx.size()) throw SchemaError("noisy illuminance columns do not match LUX columns");
        for (std::size_t c = 0; c < noisy_idx.size(); ++c) {
            if (header[noisy_idx[c]].substr(schema.noisy_lux_prefix.size()) != t.lux_names[c]) {
                throw SchemaError("noisy illuminance column \"" + header[noisy_idx[c]] + "\" is out of order");
            }
        }
    }

    std::vector<double> rssi, coords, lux, noisy;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError(row, cells.size() < header.size() ? header[cells.size()] : header.back(),
                             "expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        }
        auto number = [&](std::size_t col) {
            const auto v = detail::parse_number(cells[col]);
            if (!v) throw ParseError(row, header[col], "cannot parse '" + cells[col] + "' as a number");
            return *v;
        };
        for (auto i : wap_idx) {
            const double v = number(i);
            if (v != schema.not_detected && !(v >= schema.rssi_floor && v <= 0.0)) {
                throw ParseError(row, header[i], "RSSI " + cells[i] + " outside [" + format_number(schema.rssi_floor) +
                                                     ", 0] and not the sentinel " +
                                                     format_number(schema.not_detected));
            }
            rssi.push_back(v);
        }
        coords.push_back(number(x_idx));
        coords.push_back(number(y_idx));
        for (auto i : lux_idx) lux.push_back(number(i));
        for (auto i : noisy_idx) noisy.push_back(number(i));
        std::vector<std::string> m;
        m.reserve(meta_idx.size());
        for (auto i : meta_idx) m.push_back(cells[i]);
        t.meta.push_back(std::move(m));
    }
    t.rssi = Matrix(row, wap_idx.size(), std::move(rssi));
    t.coords = Matrix(row, 2, std::move(coords));
    t.lux = Matrix(row, lux_idx.size(), std::move(lux));
    if (!noisy_idx.empty()) t.lux_noisy = Matrix(row, noisy_idx.size(), std::move(noisy));
    return t;
}

inline FingerprintTable load_csv(const std::string& path, const CsvSchema& schema = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CSV file: " + path);
    try {
        return read_csv(in, schema);
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

/// Column order: WAPs, coordinates, LUX_*, LUXN_*, metadata.
inline void write_csv(std::ostream& out, const FingerprintTable& t, const CsvSchema& schema = {}) {
    std::vector<std::string> header = t.wap_names;
    header.push_back(schema.x_column);
    header.push_back(schema.y_column);
    for (const auto& n : t.lux_names) header.push_back(schema.lux_prefix + n);
    if (t.lux_noisy.cols() > 0) {
        for (const auto& n : t.lux_names) header.push_back(schema.noisy_lux_prefix + n);
    }
    for (const auto& n : t.meta_names) header.push_back(n);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << detail::quote_if_needed(header[i]);
    out << "\n";
    for (std::size_t r = 0; r < t.n_records(); ++r) {
        bool first = true;
        auto cell = [&](const std::string& s) {
            if (!first) out << ',';
            out << s;
            first = false;
        };
        for (double v : t.rssi.row(r)) cell(format_number(v));
        cell(format_number(t.coords(r, 0)));
        cell(format_number(t.coords(r, 1)));
        for (double v : t.lux.row(r)) cell(format_number(v));
        if (t.lux_noisy.cols() > 0) {
            for (double v : t.lux_noisy.row(r)) cell(format_number(v));
        }
        for (const auto& m : t.meta[r]) cell(detail::quote_if_needed(m));
        out << "\n";
    }
}

inline void save_csv(const FingerprintTable& t, const std::string& path, const CsvSchema& schema = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open CSV file for writing: " + path);
    write_csv(out, t, schema);
    if (!out) throw IoError("failed writing CSV file: " + path);
}

enum class RssiNormalizationMode { zero_one, powed };

/// Affine map of detected readings from [floor, 0] dBm onto (0, 1]:
///   base(v) = (v - floor + 1) / (1 - floor)
/// so the floor lands at 1/(1 - floor) and 0 dBm at 1. `powed` raises base to
/// the power e. Not-detected readings map to exactly 0.
struct RssiNormalization {
    RssiNormalizationMode mode = RssiNormalizationMode::zero_one;
    double floor = -104.0;
    double exponent = 1.0;
    double not_detected = 100.0;

    double offset() const noexcept { return 1.0 - floor; }

    double forward(double dbm) const noexcept {
        if (dbm == not_detected) return 0.0;
        const double base = (dbm - floor + 1.0) / offset();
        return mode == RssiNormalizationMode::zero_one ? base : std::pow(base, exponent);
    }

    /// Inverse on detected values only.
    double inverse(double feature) const noexcept {
        const double base = mode == RssiNormalizationMode::zero_one ? feature : std::pow(feature, 1.0 / exponent);
        return base * offset() + floor - 1.0;
    }
};

struct NormalizedFeatures {
    Matrix features;
    RssiNormalization map;
};

inline RssiNormalization make_normalization(RssiNormalizationMode mode, double floor = -104.0,
                                            double not_detected = 100.0) {
    return {mode, floor, mode == RssiNormalizationMode::powed ? std::numbers::e : 1.0, not_detected};
}

inline NormalizedFeatures normalize_rssi(const FingerprintTable& t, RssiNormalizationMode mode,
                                         double floor = -104.0) {
    NormalizedFeatures out{Matrix(t.rssi.rows(), t.rssi.cols()), make_normalization(mode, floor, t.not_detected)};
    for (std::size_t i = 0; i < t.rssi.size(); ++i) out.features.data()[i] = out.map.forward(t.rssi.data()[i]);
    return out;
}

enum class SplitStrategy { random, by_record_order };

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    SplitStrategy strategy = SplitStrategy::random;
};

struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

inline FingerprintTable subset(const FingerprintTable& t, std::span<const std::size_t> rows) {
    FingerprintTable out;
    out.wap_names = t.wap_names;
    out.lux_names = t.lux_names;
    out.meta_names = t.meta_names;
    out.not_detected = t.not_detected;
    out.rssi = Matrix(rows.size(), t.rssi.cols());
    out.coords = Matrix(rows.size(), 2);
    out.lux = Matrix(rows.size(), t.lux.cols());
    if (t.lux_noisy.cols() > 0) out.lux_noisy = Matrix(rows.size(), t.lux_noisy.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= t.n_records()) throw ArgumentError("subset: row index out of range");
        std::copy(t.rssi.row(r).begin(), t.rssi.row(r).end(), out.rssi.row(i).begin());
        std::copy(t.coords.row(r).begin(), t.coords.row(r).end(), out.coords.row(i).begin());
        std::copy(t.lux.row(r).begin(), t.lux.row(r).end(), out.lux.row(i).begin());
        if (t.lux_noisy.cols() > 0) {
            std::copy(t.lux_noisy.row(r).begin(), t.lux_noisy.row(r).end(), out.lux_noisy.row(i).begin());
        }
        out.meta.push_back(t.meta[r]);
    }
    return out;
}

/// Disjoint, exhaustive index sets; the train set holds round(fraction * n)
/// records. `random` takes the first part of a seeded Fisher-Yates permutation
/// and returns both index sets sorted ascending.
inline Split split(std::size_t n_records, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ArgumentError("split: train_fraction must lie strictly between 0 and 1");
    }
    if (n_records == 0) throw ArgumentError("split: empty table");
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n_records)));
    std::vector<std::size_t> order(n_records);
    for (std::size_t i = 0; i < n_records; ++i) order[i] = i;
    if (spec.strategy == SplitStrategy::random) {
        Rng rng(spec.seed);
        rng.shuffle(order);
    }
    Split s;
    s.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(s.train_indices.begin(), s.train_indices.end());
    std::sort(s.test_indices.begin(), s.test_indices.end());
    return s;
}

inline std::pair<FingerprintTable, FingerprintTable> split(const FingerprintTable& t, const SplitSpec& spec) {
    const Split s = split(t.n_records(), spec);
    return {subset(t, s.train_indices), subset(t, s.test_indices)};
}

/// Synthetic records in table form; WAP columns are WAP001.., a SOURCE column
/// labels the rows as synthetic.
inline FingerprintTable table_from_records(const Scene& scene, std::span<const ScenarioRecord> records) {
    FingerprintTable t;
    t.not_detected = scene.not_detected;
    for (std::size_t a = 0; a < scene.access_points.size(); ++a) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "WAP%03zu", a + 1);
        t.wap_names.emplace_back(buf);
    }
    for (const auto& c : scene.conditions) t.lux_names.emplace_back(condition_name(c.kind));
    t.meta_names = {"SOURCE"};
    const std::size_t n = records.size();
    t.rssi = Matrix(n, t.wap_names.size());
    t.coords = Matrix(n, 2);
    t.lux = Matrix(n, t.lux_names.size());
    const bool noisy = n > 0 && records.front().lux_noisy.has_value();
    if (noisy) t.lux_noisy = Matrix(n, t.lux_names.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        std::copy(r.rssi.begin(), r.rssi.end(), t.rssi.row(i).begin());
        t.coords(i, 0) = r.position[0];
        t.coords(i, 1) = r.position[1];
        std::copy(r.lux.begin(), r.lux.end(), t.lux.row(i).begin());
        if (noisy) std::copy(r.lux_noisy->begin(), r.lux_noisy->end(), t.lux_noisy.row(i).begin());
        t.meta.push_back({"synthetic"});
    }
    return t;
}

/// Adds simulated illuminance to a table with real coordinates. `origin` is the
/// room corner expressed in the table's coordinate units; every shifted
/// position must fall inside the room. Rows are labelled SOURCE=augmented.
inline FingerprintTable augment_with_illuminance(const FingerprintTable& table, const Scene& scene,
                                                 std::span<const double> origin) {
    if (origin.size() != 2) throw ShapeError("augment: origin must be 2D");
    FingerprintTable t = table;
    t.lux_names.clear();
    for (const auto& c : scene.conditions) t.lux_names.emplace_back(condition_name(c.kind));
    t.lux = Matrix(t.n_records(), t.lux_names.size());
    t.lux_noisy = Matrix();
    std::size_t source_col = t.meta_names.size();
    for (std::size_t i = 0; i < t.meta_names.size(); ++i) {
        if (t.meta_names[i] == "SOURCE") source_col = i;
    }
    if (source_col == t.meta_names.size()) {
        t.meta_names.push_back("SOURCE");
        for (auto& m : t.meta) m.emplace_back();
    }
    for (std::size_t r = 0; r < t.n_records(); ++r) {
        const Vector pos{t.coords(r, 0) - origin[0], t.coords(r, 1) - origin[1]};
        for (std::size_t c = 0; c < scene.conditions.size(); ++c) {
            t.lux(r, c) = illuminance_at(scene, pos, scene.conditions[c].kind);
        }
        t.meta[r][source_col] = "augmented";
    }
    return t;
}

}  // namespace hmdn
