#include "eulerci/plane_quadrature.hpp"

#include "eulerci/antidiv.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eulerci {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
using Vec = Eigen::VectorXd;

// Kronrod estimate and its difference from the embedded Gauss rule.
template <class F>
std::pair<Vec, double> gk_panel(F& ring, double a, double b) {
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    Vec k, g;
    for (std::size_t i = 0; i < xk.size(); ++i) {
        const double wgi = (i % 2 == 0) ? wg[i / 2] : 0.0;
        for (int s = (i == 0 ? 1 : -1); s <= 1; s += 2) {
            const Vec v = ring(mid + s * half * xk[i]);
            if (k.size() == 0) {
                k = Vec::Zero(v.size());
                g = Vec::Zero(v.size());
            }
            k += wk[i] * v;
            g += wgi * v;
        }
    }
    k *= half;
    g *= half;
    return {k, (k - g).norm()};
}

template <class F>
Vec adapt(F& ring, double a, double b, double tol, int depth) {
    auto [val, err] = gk_panel(ring, a, b);
    if (err <= tol * std::max(1.0, val.norm()) || depth <= 0) return val;
    const double m = 0.5 * (a + b);
    return adapt(ring, a, m, tol, depth - 1) + adapt(ring, m, b, tol, depth - 1);
}

}  // namespace

Vec integrate_polar(const std::function<Vec(const Vec2&)>& f, const PolarRule& rule) {
    if (rule.breaks.size() < 2) throw std::invalid_argument("polar rule needs at least one panel");
    const double dth = 2.0 * std::numbers::pi / rule.angles;
    auto ring = [&](double rho) {
        Vec acc;
        for (int m = 0; m < rule.angles; ++m) {
            const double th = (m + 0.5) * dth;
            const Vec v = f(Vec2(rule.center + rho * Vec2(std::cos(th), std::sin(th))));
            if (acc.size() == 0) acc = Vec::Zero(v.size());
            acc += v;
        }
        return Vec(acc * (dth * rho));
    };
    Vec total;
    for (std::size_t p = 0; p + 1 < rule.breaks.size(); ++p) {
        const Vec part = adapt(ring, rule.breaks[p], rule.breaks[p + 1], rule.tol, rule.max_depth);
        total = total.size() == 0 ? part : Vec(total + part);
    }
    return total;
}

PlanePoints polar_points(const PolarRule& rule, int nodes_per_panel) {
    PlanePoints pts;
    const auto& gl = detail::gauss_legendre_rule(nodes_per_panel);
    const double dth = 2.0 * std::numbers::pi / rule.angles;
    for (std::size_t p = 0; p + 1 < rule.breaks.size(); ++p) {
        const double a = rule.breaks[p], b = rule.breaks[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (const auto& [t, wt] : gl) {
            const double rho = mid + half * t;
            for (int m = 0; m < rule.angles; ++m) {
                const double th = (m + 0.5) * dth;
                pts.x.push_back(rule.center + rho * Vec2(std::cos(th), std::sin(th)));
                pts.w.push_back(wt * half * rho * dth);
            }
        }
    }
    return pts;
}

double lp_norm_points(const PlanePoints& pts, const std::vector<double>& magnitude, double p) {
    if (p < 1) throw std::invalid_argument("L^p norm needs p >= 1");
    if (std::isinf(p)) {
        double m = 0;
        for (double v : magnitude) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) acc += pts.w[i] * std::pow(std::abs(magnitude[i]), p);
    return std::pow(acc, 1.0 / p);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("slope fit needs matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace eulerci
