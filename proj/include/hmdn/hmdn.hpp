// Two frozen MDNs chained by sampling: g1 (x -> y) proposes candidates,
// g2 (y -> z) ranks them by log p(z | y), and the top N are averaged.
//
// Because z is observed, p(y | z) is proportional to p(z | y) over a fixed
// candidate set, so ranking by the g2 log-density ranks by the posterior.
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hmdn/mdn.hpp"

namespace hmdn {

struct HmdnPipeline {
    MdnModel g1;
    MdnModel g2;
    std::size_t n_candidates = 100;
    std::size_t n_selected = 20;
    // Extension: softmax(score)-weighted mean of the selected set instead of the plain mean.
    bool weighted_mean = false;

    void validate() const {
        if (g1.config().target_dim != g2.config().input_dim) {
            throw ShapeError("pipeline: g1 target dimension " + std::to_string(g1.config().target_dim) +
                             " does not match g2 input dimension " + std::to_string(g2.config().input_dim));
        }
        if (n_selected < 1 || n_selected > n_candidates) {
            throw ArgumentError("pipeline: need 1 <= N <= M, got N=" + std::to_string(n_selected) +
                                ", M=" + std::to_string(n_candidates));
        }
    }
};

struct HmdnEstimate {
    Vector estimate;
    std::vector<Vector> candidates;
    Vector scores;                      // log p(z | candidate), per candidate
    std::vector<std::size_t> selected;  // candidate indices, best first
    // Every score was -inf; the estimate then averages all candidates.
    bool all_underflow = false;

    std::vector<Vector> selected_points() const {
        std::vector<Vector> out;
        out.reserve(selected.size());
        for (auto i : selected) out.push_back(candidates[i]);
        return out;
    }
};

inline std::vector<double> score_candidates(const MdnModel& g2, std::span<const Vector> candidates,
                                            std::span<const double> z) {
    if (z.size() != g2.config().target_dim) {
        throw ShapeError("score_candidates: observation has dimension " + std::to_string(z.size()) +
                         ", g2 expects " + std::to_string(g2.config().target_dim));
    }
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) scores.push_back(log_density(mixture(g2, c), z));
    return scores;
}

/// Candidate indices by descending score, ties by ascending index. NaN ranks last.
inline std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
        return std::isnan(scores[i]) ? -std::numeric_limits<double>::infinity() : scores[i];
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    return order;
}

namespace detail {

inline Vector mean_of(std::span<const Vector> pts, std::span<const std::size_t> idx) {
    Vector m(pts.front().size(), 0.0);
    for (auto i : idx) {
        for (std::size_t d = 0; d < m.size(); ++d) m[d] += pts[i][d];
    }
    for (double& v : m) v /= static_cast<double>(idx.size());
    return m;
}

}  // namespace detail

/// One draw of M candidates per call: sample from g1(x), score under g2 given z,
/// keep the best N and average them.
inline HmdnEstimate predict(const HmdnPipeline& p, std::span<const double> x, std::span<const double> z, Rng& rng) {
    p.validate();
    HmdnEstimate out;
    out.candidates = sample(mixture(p.g1, x), p.n_candidates, rng);
    out.scores = score_candidates(p.g2, out.candidates, z);
    const auto order = rank_by_score(out.scores);

    out.all_underflow = std::none_of(out.scores.begin(), out.scores.end(), [](double s) { return std::isfinite(s); });
    if (out.all_underflow) {
        out.selected = order;
        out.estimate = detail::mean_of(out.candidates, out.selected);
        return out;
    }
    out.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.n_selected));
    if (!p.weighted_mean) {
        out.estimate = detail::mean_of(out.candidates, out.selected);
        return out;
    }
    Vector sel_scores;
    for (auto i : out.selected) sel_scores.push_back(out.scores[i]);
    const double lse = log_sum_exp(sel_scores);
    out.estimate.assign(p.g1.config().target_dim, 0.0);
    for (std::size_t j = 0; j < out.selected.size(); ++j) {
        const double w = std::exp(sel_scores[j] - lse);
        for (std::size_t d = 0; d < out.estimate.size(); ++d) out.estimate[d] += w * out.candidates[out.selected[j]][d];
    }
    return out;
}

/// Mean of m draws from g1(x); the fingerprint-only reference estimate.
inline Vector predict_baseline(const MdnModel& g1, std::span<const double> x, Rng& rng, std::size_t m) {
    const auto draws = sample(mixture(g1, x), m, rng);
    std::vector<std::size_t> all(draws.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return detail::mean_of(draws, all);
}

// ---------------------------------------------------------------------------
// Estimate dumps. Whitespace-separated text, one block per prediction:
//
//   R <id> <condition> <D> <E> <M> <N> <all_underflow> truth[D] z[E] estimate[D] baseline[D]
//   C <rank> <index> <selected> <score> coords[D]      (M lines, rank order)
//
// Lines starting with '#' are comments. Numbers use 17 significant digits.

struct DumpRecord {
    std::string id;
    std::string condition;
    Vector truth;
    Vector z;
    Vector baseline;
    HmdnEstimate result;
};

namespace detail {

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_dump_header(std::ostream& out) {
    out << "# hmdn estimate dump v1\n"
        << "# R id condition D E M N all_underflow truth[D] z[E] estimate[D] baseline[D]\n"
        << "# C rank index selected score coords[D]\n";
}

inline void write_dump_record(std::ostream& out, const DumpRecord& r) {
    const auto& e = r.result;
    const std::size_t d = e.estimate.size();
    out << "R " << r.id << ' ' << r.condition << ' ' << d << ' ' << r.z.size() << ' ' << e.candidates.size() << ' '
        << e.selected.size() << ' ' << (e.all_underflow ? 1 : 0);
    for (const auto* v : {&r.truth, &r.z, &e.estimate, &r.baseline}) {
        for (double x : *v) out << ' ' << detail::num17(x);
    }
    out << '\n';
    const auto order = rank_by_score(e.scores);
    std::vector<bool> is_sel(e.candidates.size(), false);
    for (auto i : e.selected) is_sel[i] = true;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto i = order[rank];
        out << "C " << rank << ' ' << i << ' ' << (is_sel[i] ? 1 : 0) << ' ' << detail::num17(e.scores[i]);
        for (double x : e.candidates[i]) out << ' ' << detail::num17(x);
        out << '\n';
    }
}

inline std::vector<DumpRecord> read_dump(std::istream& in) {
    std::vector<DumpRecord> out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t pending = 0;
    auto fail = [&](const std::string& what) {
        throw ArgumentError("estimate dump line " + std::to_string(line_no) + ": " + what);
    };
    auto read_vec = [&](std::istringstream& ss, std::size_t n) {
        Vector v(n);
        for (auto& x : v) {
            std::string tok;
            if (!(ss >> tok)) fail("truncated record");
            x = std::strtod(tok.c_str(), nullptr);
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "R") {
            if (pending != 0) fail("previous record is missing candidate lines");
            DumpRecord r;
            std::size_t d = 0, e = 0, m = 0, n = 0;
            int flag = 0;
            if (!(ss >> r.id >> r.condition >> d >> e >> m >> n >> flag)) fail("malformed record header");
            r.truth = read_vec(ss, d);
            r.z = read_vec(ss, e);
            r.result.estimate = read_vec(ss, d);
            r.baseline = read_vec(ss, d);
            r.result.all_underflow = flag != 0;
            r.result.candidates.assign(m, Vector(d));
            r.result.scores.assign(m, 0.0);
            r.result.selected.reserve(n);
            pending = m;
            out.push_back(std::move(r));
        } else if (tag == "C") {
            if (pending == 0 || out.empty()) fail("candidate line outside a record");
            auto& r = out.back();
            std::size_t rank = 0, index = 0;
            int sel = 0;
            std::string score;
            if (!(ss >> rank >> index >> sel >> score)) fail("malformed candidate line");
            if (index >= r.result.candidates.size()) fail("candidate index out of range");
            r.result.scores[index] = std::strtod(score.c_str(), nullptr);
            r.result.candidates[index] = read_vec(ss, r.result.estimate.size());
            if (sel) r.result.selected.push_back(index);
            --pending;
        } else {
            fail("unknown line tag '" + tag + "'");
        }
    }
    if (pending != 0) throw ArgumentError("estimate dump ends inside a record");
    return out;
}

}  // namespace hmdn
