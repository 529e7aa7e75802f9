// Bessel functions of the first kind used by the dipole profile.
#pragma once

namespace eulerci {

// J_0 and J_1 (order must be 0 or 1).
double bessel_j(int order, double x);

// First positive zero of J_1, about 3.831705970.
double bessel_j1_first_zero();

// J_n(z) / z^n, regular at z = 0 (power series; intended for |z| <= 10).
double bessel_j_over_power(int n, double z);

}  // namespace eulerci
