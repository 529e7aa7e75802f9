// Parameter schedule and constraints, stage-zero data, mollification, stage assembly, diagnostics.
#include "doctest.h"

#include "eulerci/iteration.hpp"
#include "test_util.hpp"

using namespace eulerci;

namespace {

constexpr double pi = std::numbers::pi;

VectorField shear_field(const TorusGrid& g, int m, double amp, bool vertical) {
    VectorField u(g);
    const ScalarField s = sample<1>(g, [&](double x, double y) { return amp * std::sin(2 * pi * m * (vertical ? x : y)); });
    u[vertical ? 1 : 0] = s[0];
    return u;
}

}  // namespace

TEST_CASE("paper exponents satisfy every constraint exactly") {
    const auto c = check_constraints(ParameterSchedule::paper());
    REQUIRE(c.size() == 11);
    for (const auto& x : c) {
        INFO(x.text, " margin ", format_rational(x.margin));
        CHECK(x.pass);
    }
    // 16 - 159/10 - 2/245
    CHECK(c[9].margin == Rational(9, 98));
    CHECK(format_rational(Rational(9, 98)).rfind("9/98", 0) == 0);
}

TEST_CASE("single-exponent mutants break the system") {
    for (const auto& m : single_exponent_mutants()) {
        INFO(m.name);
        CHECK_FALSE(all_pass(check_constraints(m.schedule)));
    }
    ParameterSchedule s = ParameterSchedule::paper();
    s.mu = 0;
    CHECK_FALSE(check_constraints(s)[1].pass);
}

TEST_CASE("schedule values") {
    const ParameterSchedule p = ParameterSchedule::paper();
    CHECK(p.lambda(0) == 2);
    CHECK(p.lambda(1) == BigInt(1) << 110);
    CHECK(p.log10_lambda(1) == doctest::Approx(110 * std::log10(2.0)));
    // delta_1 = lambda_1^{beta}
    CHECK(p.log10_delta(1) == doctest::Approx(p.log10_lambda(1) / 245));
    const ParameterSchedule t = ParameterSchedule::toy(4);
    CHECK(t.lambda(1) == 16);
    CHECK(t.tau(1) == 1.0 / 16);
    CHECK(t.r(1) == doctest::Approx(std::pow(16.0, -1.2)));
    CHECK(1.0 / t.tau(2) == std::round(1.0 / t.tau(2)));
}

TEST_CASE("shear stage is an exact Euler-Reynolds solution") {
    const TorusGrid g(1.0, 64);
    const auto sched = ParameterSchedule::paper();
    const StageState s = stage0_shear(g, 4, sched);
    double worst = 0, nonlinear = 0, R_L1 = 0;
    for (int n = 0; n <= 40; ++n) {
        const double t = n / 40.0;
        const VectorField u = s.u(t);
        nonlinear = std::max(nonlinear, max_abs(tensor_divergence(outer_self(u, ProductRule::collocation))));
        worst = std::max(worst, max_abs(stage_residual(s, t)));
        R_L1 = std::max(R_L1, lp_norm(s.R(t), 1.0));
    }
    CHECK(nonlinear < 1e-12);
    CHECK(worst < 1e-10);
    // |R|_L1 = A max|chi'| (2/pi)/(2 pi lambda0) up to the sampling of t; the Frobenius norm adds sqrt2
    double chi_max = 0;
    for (int n = 0; n <= 4000; ++n) chi_max = std::max(chi_max, std::abs(stage_cutoff_rate(n / 4000.0)));
    const double A = shear_amplitude(4, sched);
    const double bound = 20.0 * A / 4.0 * chi_max;
    MESSAGE("R0 L1 ", R_L1, " budget ", bound, " ratio ", R_L1 / bound);
    CHECK(R_L1 <= bound);
    CHECK(stage_cutoff(0.2) == 1.0);
    CHECK(stage_cutoff(0.5) == 0.0);
}

TEST_CASE("endpoint stage") {
    const TorusGrid g(1.0, 64);
    SUBCASE("two shears") {
        const VectorField a = shear_field(g, 2, 1.0, false), b = shear_field(g, 3, 0.5, true);
        const EndpointStage e = stage0_endpoints(a, b, 1e-3);
        CHECK(e.closeness <= 0.5e-3);
        CHECK(lp_norm(e.state.u(0.0) - a, 2.0) <= 0.5e-3);
        double worst = 0;
        for (double t : {0.1, 0.3, 0.37, 0.45, 0.8}) worst = std::max(worst, max_abs(stage_residual(e.state, t)));
        CHECK(worst < 1e-8);
    }
    SUBCASE("equal endpoints give a steady stage") {
        const VectorField a = perp_gradient(testing::random_band_limited(g, 4, 3));
        const EndpointStage e = stage0_endpoints(a, a, 1e-2);
        CHECK(max_abs(e.state.u_rate(0.3)) == 0.0);
        CHECK(max_abs(stage_residual(e.state, 0.3)) < 1e-8 * max_abs(a));
    }
    SUBCASE("mean is rejected") {
        VectorField a = shear_field(g, 2, 1.0, false);
        a[0] += 1.0;
        CHECK_THROWS_AS(stage0_endpoints(a, a, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("mollified stage") {
    const TorusGrid g(1.0, 64);
    const StageState s = stage0_shear(g, 2, ParameterSchedule::toy(4));
    const double ell = 1.0 / 16;
    const StageState m = mollify_stage(s, ell);
    double worst = 0, scale = 0, drift = 0;
    for (double t : {0.2, 0.3, 0.35, 0.41}) {
        worst = std::max(worst, max_abs(stage_residual(m, t)));
        scale = std::max(scale, max_abs(m.u_rate(t)));
        drift = std::max(drift, lp_norm(m.u(t) - s.u(t), 2.0));
    }
    CHECK(worst < 1e-6 * scale);
    CHECK(drift > 0);
    MESSAGE("|u_ell - u|_2 = ", drift);

    // steady band-limited field: the commutator is second order in ell
    const VectorField a = perp_gradient(testing::random_band_limited(g, 1, 9));
    StageState steady;
    steady.grid = g;
    steady.u = [a](double) { return a; };
    steady.u_rate = [g](double) { return VectorField(g); };
    steady.p = [g](double) { return ScalarField(g); };
    steady.R = [g](double) { return SymTensorField(g); };
    const double c16 = max_abs(mollify_stage(steady, 1.0 / 16).R(0.5));
    const double c32 = max_abs(mollify_stage(steady, 1.0 / 32).R(0.5));
    MESSAGE("commutator ", c16, " -> ", c32);
    CHECK(c16 / c32 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(c32 < 0.05 * max_abs(a) * max_abs(a));
}

TEST_CASE("diagnostics") {
    const TorusGrid g(1.0, 128);
    const StageDiagnostics z = diagnose(VectorField(g), SymTensorField(g), 1.0 + 1.0 / 6500, 2.0);
    CHECK(z.R_L1 == 0.0);
    CHECK(z.u_L2 == 0.0);
    CHECK(z.Du_Lpbar == 0.0);
    CHECK(z.vort_Lp == 0.0);

    // spectral curl against centered differences: error ~ h^2
    const VectorField u = perp_gradient(testing::random_band_limited(g, 3, 17));
    const double e128 = max_abs(curl2d(u) - curl_fd(u));
    const TorusGrid g2(1.0, 256);
    const VectorField u2 = perp_gradient(testing::random_band_limited(g2, 3, 17));
    const double e256 = max_abs(curl2d(u2) - curl_fd(u2));
    CHECK(e128 / e256 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("assembled stage solves the Euler-Reynolds system") {
    const TorusGrid g(1.0, 256);
    const StageState s = stage0_shear(g, 4, ParameterSchedule::toy(4));
    ToyParameters tp;
    const AssembledStage a = assemble_stage(s, tp);
    for (const auto& r : a.samples)
        MESSAGE("t=", r.t, " quarter ", r.quarter, " rel ", r.relative, " div ", r.div_max, " boundary ", r.boundary_delta,
                " Q ", r.Q_max);
    MESSAGE("scale ", a.scale, " G ", a.G_L1[0], " ", a.G_L1[1], " ", a.G_L1[2], " ", a.G_L1[3]);
    CHECK(a.max_relative <= 1e-5);
    CHECK(a.max_div <= 1e-10);
    CHECK(a.max_boundary <= 1e-10);
    for (const auto& R : a.R) CHECK(R[1].allFinite());
}
