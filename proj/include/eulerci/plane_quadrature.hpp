// Quadrature of compactly supported fields on the plane in polar coordinates.
#pragma once

#include "eulerci/torus.hpp"

#include <functional>
#include <vector>

namespace eulerci {

struct PolarRule {
    Vec2 center = Vec2::Zero();
    std::vector<double> breaks{0.0, 1.0};  // radial panels; the integrand may kink at interior breaks
    int angles = 64;                       // trapezoid in theta
    double tol = 1e-12;                    // adaptive Gauss-Kronrod tolerance per panel (relative)
    int max_depth = 18;
};

// Integral of a vector-valued f over the disc of radius breaks.back().
Eigen::VectorXd integrate_polar(const std::function<Eigen::VectorXd(const Vec2&)>& f, const PolarRule& rule);

// Fixed-node rule: Gauss-Legendre with `nodes` points per panel times a trapezoid in theta.
// Returns points and weights for repeated use (norms of expensive fields).
struct PlanePoints {
    std::vector<Vec2> x;
    std::vector<double> w;
};
PlanePoints polar_points(const PolarRule& rule, int nodes_per_panel);

// (int |f|^p)^(1/p) over the points (p = inf gives the max).
double lp_norm_points(const PlanePoints& pts, const std::vector<double>& magnitude, double p);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eulerci
