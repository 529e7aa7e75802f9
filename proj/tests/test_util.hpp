// Shared helpers for the unit tests.
#pragma once

#include "eulerci/torus.hpp"

#include <random>

namespace eulerci::testing {

// Random trigonometric polynomial with modes |m| <= kmax in each direction.
inline ScalarField random_band_limited(const TorusGrid& g, int kmax, unsigned seed, bool zero_mean = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    struct Mode {
        int a, b;
        double c, s;
    };
    std::vector<Mode> modes;
    for (int a = -kmax; a <= kmax; ++a)
        for (int b = 0; b <= kmax; ++b) {
            if (b == 0 && a < 0) continue;
            if (zero_mean && a == 0 && b == 0) continue;
            modes.push_back({a, b, nd(rng), nd(rng)});
        }
    const double k0 = 2 * std::numbers::pi / g.L;
    return sample<1>(g, [&](double x, double y) {
        double v = 0;
        for (const auto& m : modes) {
            const double ph = k0 * (m.a * x + m.b * y);
            v += m.c * std::cos(ph) + m.s * std::sin(ph);
        }
        return v;
    });
}

inline VectorField random_vector(const TorusGrid& g, int kmax, unsigned seed) {
    VectorField v(g);
    v[0] = random_band_limited(g, kmax, seed)[0];
    v[1] = random_band_limited(g, kmax, seed + 7919)[0];
    return v;
}

inline SymTensorField random_tensor(const TorusGrid& g, int kmax, unsigned seed, bool zero_mean = false) {
    SymTensorField t(g);
    for (int k = 0; k < 3; ++k) t[k] = random_band_limited(g, kmax, seed + 101 * k, zero_mean)[0];
    return t;
}

}  // namespace eulerci::testing
