// Inverted-sinusoid toy problem: forward map x = y + 0.3 sin(2 pi y) + noise with
// y ~ U[0, 1]. Samples are stored inverted (input x, target y), so a single x in
// roughly [0.35, 0.65] has three valid targets.
#pragma once

#include <cmath>
#include <numbers>

#include "hmdn/mdn.hpp"

namespace hmdn {

inline double sinusoid_forward(double y) { return y + 0.3 * std::sin(2.0 * std::numbers::pi * y); }

inline Dataset inverted_sinusoid(std::size_t n, Rng& rng, double noise_sd = 0.05) {
    Dataset d;
    d.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = rng.uniform();
        const double x = sinusoid_forward(y) + noise_sd * rng.normal();
        d.push_back({{x}, {y}});
    }
    return d;
}

}  // namespace hmdn
