#include "eulerci/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace eulerci {

double bessel_j(int order, double x) {
    if (order != 0 && order != 1) throw std::invalid_argument("bessel_j supports orders 0 and 1");
    const double v = std::cyl_bessel_j(static_cast<double>(order), std::abs(x));
    return (order == 1 && x < 0) ? -v : v;
}

double bessel_j1_first_zero() {
    static const double root = [] {
        // J1 changes sign on [3, 4.5]; Newton with J1' = J0 - J1/x, kept inside the bracket.
        double lo = 3.0, hi = 4.5, x = 3.8;
        for (int it = 0; it < 100; ++it) {
            const double f = bessel_j(1, x);
            if (f > 0) lo = x; else hi = x;
            const double df = bessel_j(0, x) - f / x;
            double next = x - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - x) < 1e-15) { x = next; break; }
            x = next;
        }
        return x;
    }();
    return root;
}

double bessel_j_over_power(int n, double z) {
    // sum_m (-1)^m (z/2)^{2m} / (2^n m! (m+n)!)
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    double term = 1.0 / (std::pow(2.0, n) * fact);
    double sum = term;
    const double q = 0.25 * z * z;
    for (int m = 1; m < 200; ++m) {
        term *= -q / (m * static_cast<double>(m + n));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace eulerci
