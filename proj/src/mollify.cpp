#include "eulerci/mollify.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>

namespace eulerci {

namespace {

using boost::math::quadrature::gauss;

// Composite Gauss-Legendre on [a, b]; the bump is flat to all orders at the ends so a
// plain composite rule converges fast.
template <class F>
double composite(F&& f, double a, double b, int panels) {
    double acc = 0.0;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) acc += gauss<double, 20>::integrate(f, a + p * w, a + (p + 1) * w);
    return acc;
}

double bump_mass_1d() {
    static const double m = composite([](double s) { return bump(s); }, -1.0, 1.0, 16);
    return m;
}

double bump_mass_2d() {
    static const double m =
        2.0 * std::numbers::pi * composite([](double s) { return bump(s) * s; }, 0.0, 1.0, 16);
    return m;
}

}  // namespace

double bump(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_kernel_1d(double s) { return bump(s) / bump_mass_1d(); }

double bump_transform_1d(double w) {
    if (w == 0.0) return 1.0;
    const int panels = 16 + static_cast<int>(std::abs(w));
    return composite([w](double s) { return bump(s) * std::cos(w * s); }, -1.0, 1.0, panels) / bump_mass_1d();
}

double bump_kernel_2d(double radius) { return bump(radius) / bump_mass_2d(); }

StepJet smooth_step(double s) {
    if (s <= 0.0) return {0.0, 0.0, 0.0};
    if (s >= 1.0) return {1.0, 0.0, 0.0};
    // S = A/(A+B), A = exp(-1/s), B = exp(-1/(1-s)).
    const double u = 1.0 - s;
    const double A = std::exp(-1.0 / s), B = std::exp(-1.0 / u);
    const double A1 = A / (s * s), A2 = A * (1.0 / (s * s * s * s) - 2.0 / (s * s * s));
    const double B1 = -B / (u * u), B2 = B * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
    const double D = A + B, D1 = A1 + B1, D2 = A2 + B2;
    const double v = A / D;
    const double d1 = (A1 - v * D1) / D;
    const double d2 = (A2 - 2.0 * d1 * D1 - v * D2) / D;
    return {v, d1, d2};
}

std::vector<double> time_kernel_weights(double ell, double dt) {
    const int half = static_cast<int>(std::floor(ell / dt));
    std::vector<double> w(2 * half + 1);
    double sum = 0.0;
    for (int m = -half; m <= half; ++m) sum += w[m + half] = bump(m * dt / ell);
    for (auto& x : w) x /= sum;
    return w;
}

}  // namespace eulerci
