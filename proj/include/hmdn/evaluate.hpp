// Position-error summaries and the paired bootstrap used to compare the
// fingerprint-only baseline against the filtered estimate.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hmdn/hmdn.hpp"
#include "hmdn/numcore.hpp"

namespace hmdn {

struct MethodMetrics {
    std::string condition;
    std::string method;  // "baseline" or "hmdn"
    std::size_t n = 0;
    double mean_error = 0.0;
    double median_error = 0.0;
};

struct ConditionComparison {
    std::string condition;
    MethodMetrics baseline;
    MethodMetrics hmdn;
    // Mean over records of (baseline error - hmdn error); positive means hmdn is better.
    double mean_improvement = 0.0;
    // mean_improvement as a percentage of the mean baseline error.
    double improvement_pct = 0.0;
    // Percentile bootstrap interval of mean_improvement, resampling records.
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t resamples = 0;

    bool interval_excludes_zero() const noexcept { return ci_low > 0.0 || ci_high < 0.0; }
    bool interval_contains_zero() const noexcept { return !interval_excludes_zero(); }
};

/// Linear-interpolation quantile of sorted data (q in [0, 1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ArgumentError("quantile of empty range");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline MethodMetrics summarize(std::string condition, std::string method, std::span<const double> errors) {
    return {std::move(condition), std::move(method), errors.size(), mean(errors),
            median(std::vector<double>(errors.begin(), errors.end()))};
}

/// Paired comparison with a percentile bootstrap (resampling record indices
/// with replacement, `resamples` times, using `rng`).
inline ConditionComparison compare_errors(const std::string& condition, std::span<const double> baseline_errors,
                                          std::span<const double> hmdn_errors, Rng& rng,
                                          std::size_t resamples = 10000) {
    if (baseline_errors.empty()) throw ArgumentError("compare_errors: no test records");
    if (baseline_errors.size() != hmdn_errors.size()) throw ShapeError("compare_errors: unpaired error lists");
    ConditionComparison c;
    c.condition = condition;
    c.baseline = summarize(condition, "baseline", baseline_errors);
    c.hmdn = summarize(condition, "hmdn", hmdn_errors);
    const std::size_t n = baseline_errors.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = baseline_errors[i] - hmdn_errors[i];
    c.mean_improvement = mean(diff);
    c.improvement_pct = c.baseline.mean_error > 0.0 ? 100.0 * c.mean_improvement / c.baseline.mean_error : 0.0;
    c.resamples = resamples;

    std::vector<double> stats;
    stats.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += diff[rng.index(n)];
        stats.push_back(acc / static_cast<double>(n));
    }
    std::sort(stats.begin(), stats.end());
    if (!stats.empty()) {
        c.ci_low = quantile_sorted(stats, 0.025);
        c.ci_high = quantile_sorted(stats, 0.975);
    }
    return c;
}

struct ErrorLists {
    std::vector<double> baseline;
    std::vector<double> hmdn;
};

/// Errors grouped by condition, in first-appearance order of the conditions.
inline std::vector<std::pair<std::string, ErrorLists>> errors_from_dump(std::span<const DumpRecord> records) {
    std::vector<std::pair<std::string, ErrorLists>> out;
    for (const auto& r : records) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.condition; });
        if (it == out.end()) {
            out.push_back({r.condition, {}});
            it = out.end() - 1;
        }
        it->second.baseline.push_back(euclidean_distance(r.baseline, r.truth));
        it->second.hmdn.push_back(euclidean_distance(r.result.estimate, r.truth));
    }
    return out;
}

inline void write_metrics_csv(std::ostream& out, std::span<const ConditionComparison> rows) {
    out << "condition,method,n,mean_error,median_error,mean_improvement,improvement_pct,ci_low,ci_high\n";
    for (const auto& c : rows) {
        for (const auto* m : {&c.baseline, &c.hmdn}) {
            out << m->condition << ',' << m->method << ',' << m->n << ',' << detail::num17(m->mean_error) << ','
                << detail::num17(m->median_error);
            if (m == &c.hmdn) {
                out << ',' << detail::num17(c.mean_improvement) << ',' << detail::num17(c.improvement_pct) << ','
                    << detail::num17(c.ci_low) << ',' << detail::num17(c.ci_high) << '\n';
            } else {
                out << ",,,,\n";
            }
        }
    }
}

inline void write_metrics_table(std::ostream& out, std::span<const ConditionComparison> rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %-9s %5s %10s %10s %10s %22s\n", "condition", "method", "n", "mean[m]",
                  "median[m]", "improv[%]", "95% CI (paired diff)");
    out << buf;
    for (const auto& c : rows) {
        std::snprintf(buf, sizeof buf, "%-14s %-9s %5zu %10.3f %10.3f %10s %22s\n", c.condition.c_str(), "baseline",
                      c.baseline.n, c.baseline.mean_error, c.baseline.median_error, "", "");
        out << buf;
        char ci[64];
        std::snprintf(ci, sizeof ci, "[%.3f, %.3f]", c.ci_low, c.ci_high);
        std::snprintf(buf, sizeof buf, "%-14s %-9s %5zu %10.3f %10.3f %10.1f %22s\n", c.condition.c_str(), "hmdn",
                      c.hmdn.n, c.hmdn.mean_error, c.hmdn.median_error, c.improvement_pct, ci);
        out << buf;
    }
}

}  // namespace hmdn
