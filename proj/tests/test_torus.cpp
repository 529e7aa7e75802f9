// Spectral field algebra, norms, mollification and field serialization.
#include "doctest.h"
#include "test_util.hpp"

#include "eulerci/field_io.hpp"
#include "eulerci/mollify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cstdio>
#include <filesystem>

using namespace eulerci;
using eulerci::testing::random_band_limited;
using eulerci::testing::random_tensor;
using eulerci::testing::random_vector;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("grid validation") {
    CHECK_THROWS(TorusGrid(1.0, 7));
    CHECK_THROWS(TorusGrid(1.0, 6));
    CHECK_THROWS(TorusGrid(0.0, 16));
    CHECK_NOTHROW(TorusGrid(2 * pi, 8));
}

TEST_CASE("gradient of constants and single modes") {
    TorusGrid g(1.0, 32);
    auto c = sample<1>(g, [](double, double) { return 3.5; });
    CHECK(max_abs(gradient(c)) < 1e-13);

    for (double L : {1.0, 2 * pi}) {
        TorusGrid gl(L, 32);
        const double k = 2 * pi / L;
        auto f = sample<1>(gl, [&](double x, double) { return std::sin(k * x); });
        auto d = gradient(f);
        auto want = sample<2>(gl, [&](double x, double) { return Vec2(k * std::cos(k * x), 0); });
        CHECK(max_abs(d - want) < 1e-12 * k);
    }
}

TEST_CASE("gradient agrees with centered differences at second order") {
    // Oracle: O(h^2) finite differences of the analytic field at two resolutions.
    auto f = [](double x, double y) { return std::sin(2 * pi * x) * std::cos(4 * pi * y) + std::cos(2 * pi * (x + y)); };
    double err[2];
    int idx = 0;
    for (int N : {32, 64}) {
        TorusGrid g(1.0, N);
        auto d = gradient(sample<1>(g, f));
        const double h = g.h();
        double e = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double x = g.coord(i), y = g.coord(j);
                const double fd = (f(x + h, y) - f(x - h, y)) / (2 * h);
                e = std::max(e, std::abs(fd - d[0](i, j)));
            }
        err[idx++] = e;
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("perp gradient, divergence and curl") {
    TorusGrid g(1.0, 32);
    auto f = sample<1>(g, [](double, double y) { return std::sin(2 * pi * y); });
    auto p = perp_gradient(f);
    auto want = sample<2>(g, [](double, double y) { return Vec2(-2 * pi * std::cos(2 * pi * y), 0); });
    CHECK(max_abs(p - want) < 1e-12);

    auto r = random_band_limited(g, 6, 11);
    CHECK(max_abs(divergence(perp_gradient(r))) < 1e-12 * max_abs(r) * 100);
    CHECK(max_abs(curl2d(perp_gradient(r)) - laplacian(r)) < 1e-9);
}

TEST_CASE("tensor divergence of a scalar times xi x xi") {
    // Oracle: symbolic derivative of a = cos(2 pi (x + 2y)) + sin(2 pi x).
    TorusGrid g(1.0, 32);
    const Vec2 xi = Vec2(3, 4) / 5.0;
    auto a = [](double x, double y) { return std::cos(2 * pi * (x + 2 * y)) + std::sin(2 * pi * x); };
    auto da = [](double x, double y) {
        const double s = -2 * pi * std::sin(2 * pi * (x + 2 * y));
        return Vec2(s + 2 * pi * std::cos(2 * pi * x), 2 * s);
    };
    auto t = sample<3>(g, [&](double x, double y) {
        const double v = a(x, y);
        return Eigen::Vector3d(v * xi(0) * xi(0), v * xi(0) * xi(1), v * xi(1) * xi(1));
    });
    auto want = sample<2>(g, [&](double x, double y) { return Vec2(xi.dot(da(x, y)) * xi); });
    CHECK(max_abs(tensor_divergence(t) - want) < 1e-11);
}

TEST_CASE("inverse Laplacian") {
    for (double L : {1.0, 2 * pi}) {
        TorusGrid g(L, 32);
        const double k = 2 * pi / L;
        auto f = sample<1>(g, [&](double x, double) { return std::sin(k * x); });
        auto want = sample<1>(g, [&](double x, double) { return -std::sin(k * x) / (k * k); });
        CHECK(max_abs(inverse_laplacian(f) - want) < 1e-13);
    }
    TorusGrid g(1.0, 64);
    CHECK(max_abs(inverse_laplacian(ScalarField(g))) == 0.0);
    CHECK_THROWS(inverse_laplacian(sample<1>(g, [](double, double) { return 1.0; })));
    for (unsigned seed = 1; seed <= 5; ++seed) {
        auto f = random_band_limited(g, 20, seed);
        CHECK(max_abs(laplacian(inverse_laplacian(f)) - f) < 1e-10 * max_abs(f));
        CHECK(max_abs(inverse_laplacian(laplacian(f)) - f) < 1e-10 * max_abs(f));
    }
}

TEST_CASE("Leray projection") {
    TorusGrid g(1.0, 64);
    for (unsigned seed = 1; seed <= 4; ++seed) {
        auto phi = random_band_limited(g, 12, seed);
        auto u = perp_gradient(phi);
        CHECK(max_abs(leray_project(u) - u) < 1e-12 * max_abs(u));
        auto grad = gradient(phi);
        CHECK(max_abs(leray_project(grad)) < 1e-12 * max_abs(grad));
        auto v = random_vector(g, 20, seed);
        auto pv = leray_project(v);
        CHECK(max_abs(divergence(pv)) < 1e-10);
        CHECK(max_abs(leray_project(pv) - pv) < 1e-12 * max_abs(v));
        // v - Pv is a gradient: its curl vanishes
        CHECK(max_abs(curl2d(VectorField(v - pv))) < 1e-10);
    }
}

TEST_CASE("lp norms") {
    TorusGrid g(1.0, 64);
    auto c = sample<1>(g, [](double, double) { return -2.5; });
    for (double p : {1.0, 1.5, 2.0, 4.0, double(INFINITY)}) CHECK(lp_norm(c, p) == doctest::Approx(2.5).epsilon(1e-12));
    auto s = sample<1>(g, [](double x, double) { return std::sin(2 * pi * x); });
    CHECK(lp_norm(s, 2.0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS(lp_norm(s, 0.5));

    // smooth bump: oracle is adaptive 1-D quadrature of the radial integral
    const double R = 0.3;
    auto bump_field = sample<1>(g, [&](double x, double y) {
        return bump(std::hypot(x - 0.5, y - 0.5) / R);
    });
    for (double p : {1.0, 2.0, 3.0}) {
        const double radial = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double rho) { return std::pow(bump(rho / R), p) * rho; }, 0.0, R, 15, 1e-14);
        const double want = std::pow(2 * pi * radial, 1.0 / p);
        CHECK(lp_norm(bump_field, p) == doctest::Approx(want).epsilon(1e-6));
    }

    // Jensen on the unit torus
    for (unsigned seed = 1; seed <= 5; ++seed) {
        auto f = random_band_limited(g, 8, seed);
        double prev = 0;
        for (double p : {1.0, 1.5, 2.0, 3.0, 6.0, double(INFINITY)}) {
            const double n = lp_norm(f, p);
            CHECK(prev <= n + 1e-12);
            prev = n;
        }
    }
}

TEST_CASE("resolution consistency on band-limited data") {
    auto fn = [](double x, double y) { return std::sin(2 * pi * (3 * x - y)) + std::cos(2 * pi * 5 * y); };
    TorusGrid a(1.0, 32), b(1.0, 64);
    auto fa = inverse_laplacian(sample<1>(a, fn));
    auto fb = inverse_laplacian(sample<1>(b, fn));
    double d = 0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) d = std::max(d, std::abs(fa[0](i, j) - fb[0](2 * i, 2 * j)));
    CHECK(d < 1e-12);
    CHECK(lp_norm(sample<1>(a, fn), 2.0) == doctest::Approx(lp_norm(sample<1>(b, fn), 2.0)).epsilon(1e-12));
}

TEST_CASE("translation and interpolation") {
    TorusGrid g(1.0, 32);
    auto f = random_band_limited(g, 10, 5);
    const Vec2 s(0.137, -0.291);
    auto t = translate(f, s);
    for (int trial = 0; trial < 5; ++trial) {
        const Vec2 x(0.1 * trial + 0.03, 0.77 - 0.13 * trial);
        CHECK(evaluate_interpolant(t, x) == doctest::Approx(evaluate_interpolant(f, Vec2(x - s))).epsilon(1e-11));
    }
    CHECK(evaluate_interpolant(f, Vec2(g.coord(3), g.coord(7))) == doctest::Approx(f[0](3, 7)).epsilon(1e-12));
}

TEST_CASE("dealiased products") {
    TorusGrid g(1.0, 48);
    auto u = random_vector(g, 8, 3);
    auto t = sym_outer(u, u, ProductRule::two_thirds);
    auto c = sym_outer(u, u, ProductRule::collocation);
    // modes up to 16 <= N/3 survive exactly
    CHECK(max_abs(t - c) < 1e-11);
    auto w = outer_self(u);
    CHECK(max_abs(SymTensorField(2.0 * w - t)) < 1e-12);
}

TEST_CASE("bump kernels") {
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(bump_transform_1d(0.0) == 1.0);
    const double m = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double s) { return bump_kernel_1d(s); }, -1.0, 1.0, 15, 1e-14);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    const double m2 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double s) { return 2 * pi * s * bump_kernel_2d(s); }, 0.0, 1.0, 15, 1e-14);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    for (double s : {0.1, 0.4, 0.8}) {
        const auto j = smooth_step(s), jp = smooth_step(s + 1e-5), jm = smooth_step(s - 1e-5);
        CHECK(j.d1 == doctest::Approx((jp.v - jm.v) / 2e-5).epsilon(1e-7));
        CHECK(j.d2 == doctest::Approx((jp.d1 - jm.d1) / 2e-5).epsilon(1e-6));
    }
    CHECK(smooth_step(0.5).v == doctest::Approx(0.5));
}

TEST_CASE("mollification") {
    TorusGrid g(1.0, 64);
    const double ell = 0.05;
    auto one = sample<1>(g, [](double, double) { return 1.0; });
    CHECK(max_abs(mollify_space<1>(one, ell) - one) < 1e-13);
    auto f = random_band_limited(g, 10, 2, false);
    CHECK(mollify_space<1>(f, ell)[0].mean() == doctest::Approx(f[0].mean()).epsilon(1e-10));

    // single mode: amplitude equals the kernel transform; oracle = direct 2-D convolution quadrature
    const int k = 3;
    auto mode = sample<1>(g, [&](double x, double) { return std::cos(2 * pi * k * x); });
    auto sm = mollify_space<1>(mode, ell);
    const double amp = bump_transform_1d(2 * pi * k * ell);
    CHECK(sm[0](0, 0) == doctest::Approx(amp).epsilon(1e-12));
    const double direct = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return bump_kernel_1d(s / ell) / ell * std::cos(2 * pi * k * s); }, -ell, ell, 15, 1e-14);
    CHECK(direct == doctest::Approx(amp).epsilon(1e-10));

    // space-time: constant in time stays fixed, time kernel commutes with linear trends
    SpaceTimeField<ScalarField> st;
    const double dt = 0.01;
    for (int n = 0; n < 30; ++n) st.push(n * dt, ScalarField(mode * (1.0 + n * dt)));
    auto out = mollify<1>(st, 0.05);
    REQUIRE(out.size() > 0);
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double t = out.times[n];
        CHECK(max_abs(out.frames[n] - ScalarField(sm * (1.0 + t))) < 1e-12);
    }
    CHECK_THROWS(mollify<1>(st, 0.005));
    CHECK_THROWS(st.push(0.0, ScalarField(g)));
}

TEST_CASE("space-time norms") {
    TorusGrid g(1.0, 16);
    SpaceTimeField<ScalarField> st;
    for (int n = 0; n < 4; ++n) st.push(n, sample<1>(g, [&](double, double) { return double(n); }));
    CHECK(space_time_norm(st, TimeNorm::sup, 2.0) == doctest::Approx(3.0));
    CHECK(space_time_norm(st, TimeNorm::mean, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("binary and CSV field files") {
    TorusGrid g(2 * pi, 16);
    auto t = random_tensor(g, 4, 9);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string bin = (dir / "eulerci_field_test.bin").string();
    write_field_binary<3>(bin, t);
    CHECK(std::filesystem::file_size(bin) == 8 + 8 + 8 + 3 * 16 * 16 * 8);
    auto back = read_field_binary<3>(bin);
    CHECK(back.grid == g);
    CHECK(max_abs(back - t) == 0.0);
    CHECK_THROWS(read_field_binary<2>(bin));
    const std::string csv = (dir / "eulerci_field_test.csv").string();
    write_field_csv<3>(csv, t, 4);
    std::ifstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header == "x1,x2,c0,c1,c2");
    std::remove(bin.c_str());
    std::remove(csv.c_str());
}
