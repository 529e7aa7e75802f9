// Inverse-divergence operators: the compactly supported Bogovskii operator on the plane and
// the symmetric anti-divergence on the torus.
#pragma once

#include "eulerci/mollify.hpp"
#include "eulerci/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace eulerci {

// ------------------------------------------------------------------ torus

// T = D w + (D w)^t - I div w with Lap w = v. Rejects inputs with non-zero mean.
SymTensorField symmetric_antidiv(const VectorField& v, double tol = 1e-10);

// Same operator after removing the mean of v; the removed mean is returned through `dropped`.
SymTensorField symmetric_antidiv_projected(const VectorField& v, Vec2* dropped = nullptr);

// ------------------------------------------------------------------ plane

struct BogovskiiBall {
    Vec2 center = Vec2::Zero();
    double radius = 1.0;               // support of the weight and of the output
    std::vector<double> kink_radii{};  // circles (around center) where the input is not smooth
    int angles = 256;
    int ray_nodes = 24;
    int weight_nodes = 40;
    double max_panel = 0.1;   // longest Gauss panel along a ray, relative to the radius
};

namespace detail {

const std::vector<std::pair<double, double>>& gauss_legendre_rule(int n);

// Chord parameters t >= 0 where |d + t*w| <= rad; returns false if the ray misses.
inline bool ray_disc(const Vec2& d, const Vec2& w, double rad, double& t0, double& t1) {
    const double b = d.dot(w), c = d.squaredNorm() - rad * rad;
    const double disc = b * b - c;
    if (disc <= 0) return false;
    const double s = std::sqrt(disc);
    t0 = std::max(0.0, -b - s);
    t1 = -b + s;
    return t1 > t0;
}

}  // namespace detail

// Bogovskii operator for the unit-mass bump weight on the ball, applied to each of the K
// components of f (f returns Eigen::Matrix<double, K, 1>). Row j of the result is B(f_j)(x).
// Uses the ray form B f(x) = int_{S^1} w [G0(x,w) int f(x - t w) t dt + G1(x,w) int f(x - t w) dt] dw,
// G0 = int gamma(x + u w) du, G1 = int gamma(x + u w) u du.
template <int K, class F>
Eigen::Matrix<double, K, 2> bogovskii_apply(F&& f, const BogovskiiBall& ball, const Vec2& x) {
    using Out = Eigen::Matrix<double, K, 2>;
    using Val = Eigen::Matrix<double, K, 1>;
    Out acc = Out::Zero();
    const Vec2 d = x - ball.center;
    const double R = ball.radius;
    if (d.norm() >= R) return acc;
    const auto& gw = detail::gauss_legendre_rule(ball.weight_nodes);
    const auto& gr = detail::gauss_legendre_rule(ball.ray_nodes);
    const double inv_r2 = 1.0 / (R * R);
    const double dth = 2.0 * std::numbers::pi / ball.angles;
    std::vector<double> cuts;
    for (int m = 0; m < ball.angles; ++m) {
        const double th = (m + 0.5) * dth;
        const Vec2 w(std::cos(th), std::sin(th));
        // weight along the forward ray
        double u0, u1;
        if (!detail::ray_disc(d, w, R, u0, u1)) continue;
        double G0 = 0, G1 = 0;
        {
            const double half = 0.5 * (u1 - u0), mid = 0.5 * (u1 + u0);
            for (const auto& [node, wt] : gw) {
                const double u = mid + half * node;
                const double gam = bump_kernel_2d((d + u * w).norm() / R) * inv_r2;
                G0 += wt * half * gam;
                G1 += wt * half * gam * u;
            }
        }
        // input along the backward ray, split where it crosses a kink circle
        double t0, t1;
        if (!detail::ray_disc(d, -w, R, t0, t1)) continue;
        cuts.assign({t0, t1});
        for (double rk : ball.kink_radii) {
            double a, b;
            const double bb = d.dot(-w), cc = d.squaredNorm() - rk * rk, disc = bb * bb - cc;
            if (disc <= 0) continue;
            a = -bb - std::sqrt(disc);
            b = -bb + std::sqrt(disc);
            if (a > t0 && a < t1) cuts.push_back(a);
            if (b > t0 && b < t1) cuts.push_back(b);
        }
        std::sort(cuts.begin(), cuts.end());
        Val A0 = Val::Zero(), A1 = Val::Zero();
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double len = cuts[p + 1] - cuts[p];
            if (len <= 0) continue;
            const int panels = std::max(1, static_cast<int>(std::ceil(len / (ball.max_panel * R))));
            const double half = 0.5 * len / panels;
            for (int q = 0; q < panels; ++q) {
                const double mid = cuts[p] + (2 * q + 1) * half;
                for (const auto& [node, wt] : gr) {
                    const double t = mid + half * node;
                    const Val fv = f(Vec2(x - t * w));
                    A0 += (wt * half * t) * fv;
                    A1 += (wt * half) * fv;
                }
            }
        }
        const Val s = G0 * A0 + G1 * A1;
        acc += dth * s * w.transpose();
    }
    return acc;
}

}  // namespace eulerci
