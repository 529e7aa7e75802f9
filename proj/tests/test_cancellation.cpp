// Auxiliary profile, the replaced source, cancellation by time averaging and the time corrector.
#include "doctest.h"

#include "eulerci/cancellation.hpp"
#include "test_util.hpp"

#include <random>

using namespace eulerci;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField smooth_coefficient(const TorusGrid& g, double base = 1.0) {
    return sample<1>(g, [base](double x, double y) {
        return base * (1.0 + 0.3 * std::sin(2 * pi * x + 0.3) * std::cos(2 * pi * y) + 0.2 * std::cos(2 * pi * (x + 2 * y)));
    });
}

// Cell whose closed-form period is theta tau / lambda.
Cell make_cell(const ScalarField& a, int lambda, double tau, int k, int i, double theta = 0.45) {
    const DirectionSet d = build_directions(lambda);
    const TimePartition p(tau, lambda);
    const StartSelection s = select_amplitude_and_start(a, d.dirs[i - 1], p, k, i, true);
    const double scale = scale_for_period(d.dirs[i - 1], lambda, s.eta, theta * tau / lambda);
    return build_cell(a, d, p, k, i, scale, true);
}

}  // namespace

TEST_CASE("auxiliary profile: averages, support and scaling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> l2;
    for (int lambda : {8, 16, 32}) {
        const TorusGrid g(1.0, lambda == 32 ? 512 : 256);
        const DirectionSet d = build_directions(lambda);
        const AuxiliaryProfile prof(d.dirs[2], lambda);
        const Vec2 c(u(rng), u(rng));
        const ScalarField U = prof.sample(g, c);
        CHECK(std::abs(U[0].mean() - 1.0) < 1e-8);
        CHECK(U[0].minCoeff() >= 0.0);
        CHECK(prof.min_line_profile() > 0.1);
        l2.push_back(lp_norm(U, 2.0));
        double worst = 0;
        for (int n = 0; n < 100; ++n) worst = std::max(worst, std::abs(prof.line_average(Vec2(u(rng), u(rng)), c) - 1.0));
        CHECK(worst < 1e-6);
        // nothing outside the support
        double outside = 0;
        for (int j = 0; j < g.N; ++j)
            for (int i = 0; i < g.N; ++i)
                if (minimal_image(Vec2(g.coord(i), g.coord(j)) - c, 1.0).norm() >= prof.support_radius())
                    outside = std::max(outside, std::abs(U[0](i, j)));
        CHECK(outside == 0.0);
        // the tabulated line profile and gradient
        const Vec2 y(0.3 / lambda, -0.7 / lambda);
        const double h = 1e-7 / lambda;
        const Vec2 fd((prof.value(y + Vec2(h, 0)) - prof.value(y - Vec2(h, 0))) / (2 * h),
                      (prof.value(y + Vec2(0, h)) - prof.value(y - Vec2(0, h))) / (2 * h));
        CHECK((prof.gradient(y) - fd).norm() < 1e-6 * fd.norm());
        CHECK(prof.line_profile(0.37 / lambda) == doctest::Approx(prof.line_profile_exact(0.37 / lambda)).epsilon(1e-12));
    }
    // ||U||_2 ~ lambda^{2 - 2/2}
    const double slope = std::log(l2[2] / l2[0]) / std::log(4.0);
    CHECK(std::abs(slope - 1.0) < 0.1);
}

TEST_CASE("replaced source vanishes where the size and the cutoff are frozen") {
    const TorusGrid g(1.0, 64);
    const double tau = 0.25;
    ScalarField flat(g);
    flat[0].setConstant(1.5);
    const Cell c = make_cell(flat, 16, tau, 0, 2);
    const TimePartition p(tau, 16);
    const auto [pa, pb] = p.plateau(0, 2);
    CHECK(max_abs(sample_U(c, g, 0.5 * (pa + pb))) < 1e-12);
    CHECK(max_abs(sample_U(c, g, p.quarter(0, 1).second * 0.5)) == 0.0);
    CHECK(max_abs(sample_U(c, g, c.begin + 0.5 * p.ramp())) > 0.0);
}

TEST_CASE("rate of the replaced source is controlled by the C1 norm of the coefficient") {
    const TorusGrid g(1.0, 64);
    const double tau = 0.25;
    std::vector<double> ratios;
    for (int seed = 0; seed < 3; ++seed) {
        ScalarField a = testing::random_band_limited(g, 3, 40 + seed, false);
        a *= 0.3 / max_abs(a);
        a[0] += 1.0;
        const Cell c = make_cell(a, 16, tau, 0, 1);
        double sup = 0;
        for (int n = 1; n < 400; ++n) sup = std::max(sup, std::abs(cell_rate(c, c.begin + (c.end - c.begin) * n / 400)));
        const double c1 = max_abs(a) + pointwise_magnitude(gradient(a)).maxCoeff();
        ratios.push_back(sup / c1);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo < 3.0);
}

TEST_CASE("time integral of U is a divergence") {
    const TorusGrid g(1.0, 64);
    const Cell c = make_cell(smooth_coefficient(g), 16, 0.25, 0, 1);
    std::vector<std::pair<double, double>> v;
    double scale = 0;
    for (const Vec2& x : {Vec2(0.3, 0.4), Vec2(0.71, 0.12), Vec2(0.5, 0.93), Vec2(0.05, 0.61)}) {
        v.push_back(pointwise_time_identity(c, x, 32));
        scale = std::max(scale, std::abs(v.back().first));
    }
    for (const auto& [l, r] : v) CHECK(std::abs(l - r) < 1e-8 * scale);
}

TEST_CASE("cancellation error decays like 1/lambda") {
    const TorusGrid g(1.0, 128);
    const double tau = 0.25;
    const ScalarField a = smooth_coefficient(g);
    const CancellationResult r8 = verify_cancellation(make_cell(a, 8, tau, 0, 1), g, tau);
    const CancellationResult r16 = verify_cancellation(make_cell(a, 16, tau, 0, 1), g, tau);
    MESSAGE("G_L1 ", r8.G_L1, " -> ", r16.G_L1);
    CHECK(r8.G_L1 / r16.G_L1 > 1.6);
    CHECK(r8.G_L1 / r16.G_L1 < 2.5);
    CHECK(r16.mean_defect < 1e-10);
    CHECK(r16.ratio < 1.0);

    // the time quadrature is converged: what is left of the gap between the grid route and the
    // piecewise one is spatial and falls quickly with the resolution
    QuadratureOptions fine;
    fine.shift = 0.25;
    const CancellationResult f = verify_cancellation(make_cell(a, 16, tau, 0, 1), g, tau, fine);
    CHECK(f.route_gap == doctest::Approx(r16.route_gap).epsilon(0.1));
    CHECK(f.G_L1 == doctest::Approx(r16.G_L1).epsilon(1e-3));
    const TorusGrid g2(1.0, 256);
    const CancellationResult r2 = verify_cancellation(make_cell(smooth_coefficient(g2), 16, tau, 0, 1), g2, tau);
    MESSAGE("route gap ", r16.route_gap, " -> ", r2.route_gap);
    CHECK(r2.route_gap < r16.route_gap / 8);
}

TEST_CASE("constant coefficient leaves only the ramp error") {
    const TorusGrid g(1.0, 128);
    const double tau = 0.25;
    ScalarField a(g);
    a[0].setConstant(1.2);
    for (int lambda : {8, 16}) {
        const CancellationResult r = verify_cancellation(make_cell(a, lambda, tau, 0, 3), g, tau);
        // G ~ a * ramp / quarter
        CHECK(r.G_L1 <= 8.0 * 1.2 / lambda);
    }
}

TEST_CASE("time corrector") {
    const TorusGrid g(1.0, 64);
    const double tau = 0.25;
    const int lambda = 16, k = 1;
    const ScalarField a = smooth_coefficient(g, 2.0);
    std::array<Cell, 4> cells;
    for (int i = 1; i <= 4; ++i) cells[i - 1] = make_cell(a, lambda, tau, k, i);
    const std::array<const Cell*, 4> ptr{&cells[0], &cells[1], &cells[2], &cells[3]};
    const double t = k * tau + 0.3 * tau, dt = 1e-7;
    std::vector<double> q{k * tau, t - 2 * dt, t - dt, t, t + dt, t + 2 * dt, (k + 0.5) * tau, (k + 1) * tau};
    const CorrectorSamples s = build_time_corrector(ptr, g, tau, q);
    double top = 0, div = 0;
    for (const auto& Q : s.Q) {
        top = std::max(top, max_abs(Q));
        div = std::max(div, max_abs(divergence(Q)));
    }
    REQUIRE(top > 0);
    CHECK(max_abs(s.Q.front()) <= 1e-10 * top);
    CHECK(max_abs(s.Q.back()) <= 1e-10 * top);
    CHECK(div <= 1e-10 * top);

    // dQ/dt = -P U + P P_tau U
    const VectorField dQ = central_difference4(s.Q[1], s.Q[2], s.Q[4], s.Q[5], dt);
    VectorField U(g);
    for (const auto& c : cells) U += sample_U(c, g, t);
    const VectorField expect = leray_project(s.PtauU - U);
    CHECK(max_abs(dQ - expect) < 1e-5 * max_abs(expect));
    double Umax = 0;
    for (int n = 0; n <= 200; ++n) {
        VectorField Un(g);
        for (const auto& c : cells) Un += sample_U(c, g, k * tau + tau * n / 200);
        Umax = std::max(Umax, lp_norm(Un, 2.0));
    }
    CHECK(lp_norm(dQ, 2.0) <= 2 * Umax);
}
