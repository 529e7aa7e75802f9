#include "eulerci/antidiv.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <mutex>

namespace eulerci {

namespace {

SymTensorField antidiv_core(const VectorField& v) {
    const auto& g = v.grid;
    using C = std::complex<double>;
    Spectrum2<double> a = fft2<double>(v[0]), b = fft2<double>(v[1]);
    Spectrum2<double> t11(g.N, g.N), t12(g.N, g.N);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            const double k1 = g.derivative_symbol(i), k2 = g.derivative_symbol(j);
            const double lap = -(k1 * k1 + k2 * k2);
            if (lap == 0.0) {
                t11(i, j) = t12(i, j) = 0;
                continue;
            }
            const C w1 = a(i, j) / lap, w2 = b(i, j) / lap;
            const C d1(0, k1), d2(0, k2);
            t11(i, j) = d1 * w1 - d2 * w2;
            t12(i, j) = d2 * w1 + d1 * w2;
        }
    SymTensorField t(g);
    t[0] = ifft2<double>(t11);
    t[1] = ifft2<double>(t12);
    t[2] = -t[0];
    return t;
}

}  // namespace

SymTensorField symmetric_antidiv(const VectorField& v, double tol) {
    require_mean_zero<double, 2>(v, tol, "symmetric_antidiv");
    return antidiv_core(v);
}

SymTensorField symmetric_antidiv_projected(const VectorField& v, Vec2* dropped) {
    if (dropped) *dropped = Vec2(v[0].mean(), v[1].mean());
    return antidiv_core(v);
}

namespace detail {

const std::vector<std::pair<double, double>>& gauss_legendre_rule(int n) {
    static std::map<int, std::vector<std::pair<double, double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::pair<double, double>> rule;
    for (int k = 1; k <= n; ++k) {
        double x = std::cos(std::numbers::pi * (k - 0.25) / (n + 0.5));
        for (int it2 = 0; it2 < 100; ++it2) {
            const double p = boost::math::legendre_p(n, x);
            const double dp = n * (x * p - boost::math::legendre_p(n - 1, x)) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = n * (x * boost::math::legendre_p(n, x) - boost::math::legendre_p(n - 1, x)) / (x * x - 1.0);
        rule.emplace_back(x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace detail

}  // namespace eulerci
