// Rank-one decomposition of the stress along four lattice directions, the time partition with
// its cutoffs, amplitude and start-point selection, and the period bookkeeping of the blocks.
#pragma once

#include "eulerci/moving_block.hpp"

#include <array>

namespace eulerci {

struct DirectionSet {
    int lambda = 8;
    Mat2 rotation = Mat2::Identity();  // K: maps the fixed frame e_i to xi_i
    std::array<Direction, 4> dirs;
};

// Rotation of the frame e1, e2, (e1+e2)/sqrt2, (e1-e2)/sqrt2 by arctan(1/lambda), which makes
// xi1 ~ (lambda, 1), xi2 ~ (-1, lambda), xi3 ~ (lambda-1, lambda+1), xi4 ~ (lambda+1, 1-lambda).
// Rejects lambda < 8 and odd lambda (xi3, xi4 would close too early).
DirectionSet build_directions(int lambda);

// Coefficients in the fixed frame with sum Gamma_i e_i (x) e_i = M.
std::array<double, 4> frame_coefficients(const Mat2& M);

struct MatrixDecomposition {
    std::array<double, 4> a{};
    double varsigma = 0;
};

// a_i = s Gamma_i(I - R/s) with s = 16 sqrt(|R|_F^2 + delta^2): sum a_i xi_i (x) xi_i = s I - R.
MatrixDecomposition decompose_matrix(const Mat2& R, const DirectionSet& d, double delta);
Mat2 reconstruct(const MatrixDecomposition& m, const DirectionSet& d);

struct FieldDecomposition {
    std::array<ScalarField, 4> a;
    ScalarField varsigma;
};
FieldDecomposition decompose_field(const SymTensorField& R, const DirectionSet& d, double delta);
// max over grid points of |sum a_i xi_i (x) xi_i + R - s I|_F
double reconstruction_error(const FieldDecomposition& f, const SymTensorField& R, const DirectionSet& d);
// a xi (x) xi as a symmetric tensor field
SymTensorField rank_one(const ScalarField& a, const Vec2& xi);

// Intervals [k tau, (k+1) tau), quarters, plateaus inset by tau/lambda and the cutoffs.
struct TimePartition {
    double tau = 0.25;
    int lambda = 8;

    TimePartition() = default;
    TimePartition(double tau_, int lambda_);

    std::pair<double, double> interval(int k) const { return {k * tau, (k + 1) * tau}; }
    std::pair<double, double> quarter(int k, int i) const;  // i = 1..4
    std::pair<double, double> plateau(int k, int i) const;
    int interval_of(double t) const { return static_cast<int>(std::floor(t / tau)); }
    // Product of smooth-step ramps of width tau/lambda: 1 on the plateau, 0 outside the quarter.
    double cutoff(int k, int i, double t) const;
    double cutoff_rate(int k, int i, double t) const;
    double ramp() const { return tau / lambda; }
};

// Composite Simpson average of g over [a, b] with n (even) panels.
template <class T, class G>
T simpson_average(G&& g, double a, double b, int n) {
    if (n < 2 || n % 2) throw std::invalid_argument("simpson_average needs an even panel count >= 2");
    const double h = (b - a) / n;
    T acc = g(a) + g(b);
    for (int m = 1; m < n; ++m) acc += (m % 2 ? 4.0 : 2.0) * g(a + m * h);
    return (h / 3.0 / (b - a)) * acc;
}

// Per-interval trapezoid average of uniformly sampled frames; the samples must cover T^k
// including both end points and at least three of them must fall inside.
template <class Field>
Field time_average(const SpaceTimeField<Field>& f, const TimePartition& p, int k) {
    const auto [a, b] = p.interval(k);
    std::vector<std::size_t> idx;
    const double eps = 1e-12 * p.tau;
    for (std::size_t n = 0; n < f.size(); ++n)
        if (f.times[n] >= a - eps && f.times[n] <= b + eps) idx.push_back(n);
    if (idx.size() < 3 || std::abs(f.times[idx.front()] - a) > eps || std::abs(f.times[idx.back()] - b) > eps)
        throw std::invalid_argument("time_average: interval is not covered by the samples");
    Field acc = f.frames[idx.front()];
    acc *= 0.0;
    for (std::size_t m = 0; m + 1 < idx.size(); ++m) {
        const double w = 0.5 * (f.times[idx[m + 1]] - f.times[idx[m]]) / (b - a);
        acc += w * f.frames[idx[m]];
        acc += w * f.frames[idx[m + 1]];
    }
    return acc;
}

struct StartSelection {
    double eta = 0;          // eta^2 = 8 pi int a (normalized blocks) or 4 int a
    Vec2 x0 = Vec2::Zero();  // line average of a through x0 equals the torus average
    double anchor = 0;       // start time of the plateau
    double line_defect = 0;  // |line average - torus average| at x0
    bool flat = false;       // transverse profile constant: any x0 works
};
StartSelection select_amplitude_and_start(const ScalarField& a_k, const Direction& d, const TimePartition& p, int k,
                                          int i, bool normalized = true);

struct PeriodInfo {
    double T = 0;   // closed-form period c lambda r eta / 4
    int M = 0;      // whole periods inside the plateau
    double window = 0;  // tau (1/4 - 2/lambda) - M T, in [0, T)
    bool enough = false;  // M >= lambda
};
// `scale` is r_{q+1}; c is the direction's closure constant.
PeriodInfo period_bookkeeping(const Direction& d, int lambda, double scale, double eta, const TimePartition& p);

// Inverse of the period formula: the scale r_{q+1} that gives period T.
double scale_for_period(const Direction& d, int lambda, double eta, double T);

// lambda^2 r delta^{1/2} <= tau / 200
bool trajectory_budget_ok(int lambda, double scale, double delta, double tau);

}  // namespace eulerci
