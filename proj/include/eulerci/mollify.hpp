// Bump kernels and mollification (space: Fourier multiplier; time: discrete convolution).
#pragma once

#include "eulerci/torus.hpp"

#include <vector>

namespace eulerci {

// exp(-1/(1-s^2)) on (-1,1), 0 elsewhere.
double bump(double s);
// Unit-mass 1-D kernel phi(s) = bump(s)/mass.
double bump_kernel_1d(double s);
// Fourier transform of the unit-mass 1-D kernel at frequency w: int phi(s) cos(w s) ds.
double bump_transform_1d(double w);
// Radial bump on the unit disc normalized to unit mass in the plane.
double bump_kernel_2d(double radius);

// C-infinity step: 0 for s <= 0, 1 for s >= 1. Returns value and two derivatives.
struct StepJet {
    double v, d1, d2;
};
StepJet smooth_step(double s);

// Spatial mollification with the tensor-product kernel of radius ell (exact on the
// trigonometric interpolant). ell = 0 returns the input.
template <int K>
TorusField<double, K> mollify_space(const TorusField<double, K>& f, double ell) {
    if (ell == 0.0) return f;
    const auto& g = f.grid;
    std::vector<double> w(g.N);
    for (int m = 0; m < g.N; ++m) w[m] = bump_transform_1d(g.wavenumber(m) * ell);
    TorusField<double, K> out(g);
    for (int k = 0; k < K; ++k)
        out[k] = apply_multiplier<double>(g, f[k], [&](int i, int j) { return std::complex<double>(w[i] * w[j], 0); });
    return out;
}

template <class Field>
struct SpaceTimeField {
    std::vector<double> times;
    std::vector<Field> frames;

    void push(double t, Field f) {
        if (!times.empty() && !(t > times.back()))
            throw std::invalid_argument("space-time samples must have increasing times");
        if (!frames.empty()) frames.front().check_same(f);
        times.push_back(t);
        frames.push_back(std::move(f));
    }
    std::size_t size() const { return times.size(); }
};

enum class TimeNorm { sup, mean };

// L^inf_t L^p_x (sup) or the time-average of the L^p_x norms (mean).
template <class Field>
double space_time_norm(const SpaceTimeField<Field>& f, TimeNorm mode, double p) {
    double acc = 0.0;
    for (const auto& fr : f.frames) {
        const double n = lp_norm(fr, p);
        acc = mode == TimeNorm::sup ? std::max(acc, n) : acc + n;
    }
    if (mode == TimeNorm::mean && !f.frames.empty()) acc /= static_cast<double>(f.frames.size());
    return acc;
}

// Weights of the discrete time kernel of radius ell on a uniform step dt (odd length, symmetric).
std::vector<double> time_kernel_weights(double ell, double dt);

// Space-time mollification of uniformly sampled frames. Only frames whose full time window is
// available are returned.
template <int K>
SpaceTimeField<TorusField<double, K>> mollify(const SpaceTimeField<TorusField<double, K>>& f, double ell) {
    if (!(ell > 0)) throw std::invalid_argument("mollify needs ell > 0");
    if (f.size() < 3) throw std::invalid_argument("mollify needs at least three frames");
    const auto& g = f.frames.front().grid;
    if (ell < 2 * g.h()) throw std::invalid_argument("mollification radius is below two grid spacings");
    const double dt = f.times[1] - f.times[0];
    for (std::size_t n = 1; n < f.size(); ++n)
        if (std::abs(f.times[n] - f.times[n - 1] - dt) > 1e-9 * dt)
            throw std::invalid_argument("mollify needs uniform time samples");
    if (ell < 2 * dt) throw std::invalid_argument("mollification radius is below two time steps");
    const auto w = time_kernel_weights(ell, dt);
    const int half = static_cast<int>(w.size() / 2);
    SpaceTimeField<TorusField<double, K>> out;
    for (int n = half; n + half < static_cast<int>(f.size()); ++n) {
        TorusField<double, K> acc(g);
        for (int m = -half; m <= half; ++m) acc += w[m + half] * f.frames[n - m];
        out.push(f.times[n], mollify_space<K>(acc, ell));
    }
    return out;
}

}  // namespace eulerci
