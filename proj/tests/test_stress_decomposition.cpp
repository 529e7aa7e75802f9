// Directions, rank-one decomposition, time partition, start selection and periods.
#include "doctest.h"

#include "eulerci/stress_decomposition.hpp"
#include "test_util.hpp"

#include <random>

using namespace eulerci;

namespace {

constexpr double pi = std::numbers::pi;

Mat2 random_symmetric(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-1, 1);
    Mat2 m;
    m(0, 0) = u(rng);
    m(0, 1) = m(1, 0) = u(rng);
    m(1, 1) = u(rng);
    return scale * std::pow(10.0, 3 * u(rng) + 3) / 1e6 * m;
}

}  // namespace

TEST_CASE("directions for lambda = 8") {
    const DirectionSet d = build_directions(8);
    CHECK(d.dirs[0].xi.isApprox(Vec2(1, 1.0 / 8) / std::sqrt(1 + 1.0 / 64), 1e-15));
    CHECK(d.dirs[0].period == doctest::Approx(8 * std::sqrt(1 + 1.0 / 64)));
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(d.dirs[i].xi.norm() - 1) < 1e-14);
        CHECK(d.dirs[i].c >= 1.0);
        CHECK(d.dirs[i].c <= 3.0);
    }
    // xi_i = K e_i
    const double s2 = 1 / std::sqrt(2.0);
    const std::array<Vec2, 4> e{Vec2(1, 0), Vec2(0, 1), Vec2(s2, s2), Vec2(s2, -s2)};
    for (int i = 0; i < 4; ++i) CHECK((d.rotation * e[i] - d.dirs[i].xi).norm() < 1e-14);
    CHECK(std::atan2(d.dirs[0].xi[1], d.dirs[0].xi[0]) == doctest::Approx(std::atan(1.0 / 8)));
    CHECK_THROWS(build_directions(6));
    CHECK_THROWS(build_directions(9));
}

TEST_CASE("frame coefficients") {
    const auto g = frame_coefficients(Mat2::Identity());
    for (double v : g) CHECK(v == 0.5);
    Mat2 r = Mat2::Zero();
    r(0, 0) = 1;
    const auto h = frame_coefficients(r);
    CHECK(h[0] == 0.5);
    CHECK(h[1] == -0.5);
    CHECK(h[2] == 0.5);
    CHECK(h[3] == 0.5);
}

TEST_CASE("matrix decomposition is exact") {
    const DirectionSet d = build_directions(8);
    const MatrixDecomposition z = decompose_matrix(Mat2::Zero(), d, 1.0);
    CHECK(z.varsigma == 16.0);
    for (double a : z.a) CHECK(a == doctest::Approx(8.0));

    std::mt19937_64 rng(3);
    const double delta = 0.7;
    double worst = 0, amin = INFINITY, gmin = INFINITY, gmax = 0;
    for (int n = 0; n < 10000; ++n) {
        const Mat2 R = random_symmetric(rng, 1e6 * delta);
        const MatrixDecomposition m = decompose_matrix(R, d, delta);
        const Mat2 err = reconstruct(m, d) + R - m.varsigma * Mat2::Identity();
        worst = std::max(worst, err.norm() / m.varsigma);
        for (double a : m.a) {
            amin = std::min(amin, a / delta);
            gmin = std::min(gmin, a / m.varsigma);
            gmax = std::max(gmax, a / m.varsigma);
        }
    }
    CHECK(worst < 1e-14);
    CHECK(amin >= 4.0);
    CHECK(gmin >= 0.25);
    CHECK(gmax <= 2.0);
}

TEST_CASE("field decomposition") {
    const TorusGrid g(1.0, 64);
    const DirectionSet d = build_directions(16);
    const double delta = 0.3;
    SymTensorField R(g);
    R[0] = testing::random_band_limited(g, 4, 1)[0];
    R[1] = testing::random_band_limited(g, 4, 2)[0];
    R[2] = testing::random_band_limited(g, 4, 3)[0];
    // normalize to ||R||_L1 = 2 delta
    R *= 2 * delta / lp_norm(R, 1.0);
    const FieldDecomposition f = decompose_field(R, d, delta);
    CHECK(reconstruction_error(f, R, d) < 1e-12 * max_abs(f.varsigma));
    for (int i = 0; i < 4; ++i) {
        CHECK(f.a[i][0].minCoeff() >= 4 * delta);
        CHECK(lp_norm(f.a[i], 1.0) <= 192 * delta);
    }
    // -div R = div(sum a xi xi) - grad varsigma
    SymTensorField sum(g);
    for (int i = 0; i < 4; ++i) sum += rank_one(f.a[i], d.dirs[i].xi);
    const VectorField lhs = -tensor_divergence(R);
    const VectorField rhs = tensor_divergence(sum) - gradient(f.varsigma);
    CHECK(max_abs(lhs - rhs) < 1e-10 * max_abs(lhs));
    // constant R = 0 gives a = 8 delta
    const FieldDecomposition z = decompose_field(SymTensorField(g), d, delta);
    CHECK(std::abs(z.a[2][0].maxCoeff() - 8 * delta) < 1e-14);
}

TEST_CASE("time partition and cutoffs") {
    const TimePartition p(0.1, 16);
    CHECK_THROWS(TimePartition(0.3, 16));
    const int k = 3;
    double slope = 0;
    for (int i = 1; i <= 4; ++i) {
        const auto [a, b] = p.quarter(k, i);
        const auto [pa, pb] = p.plateau(k, i);
        CHECK(pa == doctest::Approx(a + p.tau / 16));
        double integral = 0;
        const int n = 20000;
        for (int m = 0; m <= n; ++m) {
            const double t = a - 0.01 + (b - a + 0.02) * m / n;
            const double z = p.cutoff(k, i, t);
            if (t <= a || t >= b) CHECK(z == 0.0);
            if (t >= pa && t <= pb) CHECK(z == 1.0);
            slope = std::max(slope, std::abs(p.cutoff_rate(k, i, t)));
            integral += z * z * (b - a + 0.02) / n;
        }
        CHECK(integral < b - a);
        // the rate is the derivative of the cutoff
        const double t = a + 0.3 * p.ramp(), h = 1e-7;
        CHECK(p.cutoff_rate(k, i, t) ==
              doctest::Approx((p.cutoff(k, i, t + h) - p.cutoff(k, i, t - h)) / (2 * h)).epsilon(1e-6));
    }
    CHECK(slope <= 10 * p.lambda / p.tau);
    // disjoint supports inside T^k
    for (int i = 1; i < 4; ++i) CHECK(p.quarter(k, i).second <= p.quarter(k, i + 1).first);
}

TEST_CASE("time averages") {
    const TimePartition p(0.25, 8);
    const auto [a, b] = p.interval(2);
    CHECK(std::abs(simpson_average<double>([&](double t) { return std::sin(2 * pi * t / p.tau); }, a, b, 64)) < 1e-12);
    CHECK(simpson_average<double>([](double) { return 3.5; }, a, b, 2) == doctest::Approx(3.5));
    // sampled frames: a constant field averages to itself; fewer samples are rejected
    const TorusGrid g(1.0, 8);
    SpaceTimeField<ScalarField> f;
    for (int n = 0; n <= 40; ++n) {
        ScalarField c(g);
        const double t = 0.5 + 0.25 * n / 40;
        c[0].setConstant(std::cos(t));
        f.push(t, c);
    }
    const ScalarField m = time_average(f, p, 2);
    // |P g - g| <= tau max|g'|
    for (std::size_t n = 0; n < f.size(); ++n) CHECK(std::abs(m[0](0, 0) - f.frames[n][0](0, 0)) <= p.tau * 1.0);
    CHECK(m[0](3, 3) == doctest::Approx((std::sin(0.75) - std::sin(0.5)) / 0.25).epsilon(1e-4));
    CHECK_THROWS(time_average(f, p, 1));
}

TEST_CASE("amplitude and start point") {
    const TorusGrid g(1.0, 64);
    const DirectionSet d = build_directions(8);
    const TimePartition p(0.25, 8);
    ScalarField c(g);
    c[0].setConstant(2.0);
    const StartSelection flat = select_amplitude_and_start(c, d.dirs[0], p, 0, 1, false);
    CHECK(flat.flat);
    CHECK(flat.eta * flat.eta == doctest::Approx(8.0));
    CHECK(flat.anchor == doctest::Approx(p.tau / 8));

    // a = 2 (1 + 0.3 cos(2 pi (x . v_perp))): the transverse mode is resonant with xi1
    const Eigen::Vector2i v = d.dirs[0].v;
    const ScalarField a = sample<1>(g, [&](double x, double y) { return 2.0 * (1 + 0.3 * std::cos(2 * pi * (-v[1] * x + v[0] * y) + 0.4)); });
    const StartSelection s = select_amplitude_and_start(a, d.dirs[0], p, 0, 1, true);
    CHECK_FALSE(s.flat);
    CHECK(s.eta * s.eta == doctest::Approx(8 * pi * 2.0));
    CHECK(std::abs(line_average(a, d.dirs[0], s.x0) - 2.0) < 1e-8);
}

TEST_CASE("period bookkeeping matches the trajectory") {
    const TorusGrid g(1.0, 32);
    const DirectionSet d = build_directions(16);
    const TimePartition p(0.25, 16);
    const int k = 0, i = 3;
    const double scale = 4e-6, delta = 1.0;
    const ScalarField a = sample<1>(g, [&](double x, double y) { return 8.0 + std::sin(2 * pi * x) * std::cos(4 * pi * y); });
    const StartSelection s = select_amplitude_and_start(a, d.dirs[i - 1], p, k, i, true);
    const PeriodInfo info = period_bookkeeping(d.dirs[i - 1], p.lambda, scale, s.eta, p);
    CHECK(info.window >= 0.0);
    CHECK(info.window < info.T);
    CHECK(trajectory_budget_ok(p.lambda, scale, delta, p.tau));
    CHECK(info.M >= p.lambda);

    ScalarField r = a;
    r *= scale;
    const auto line = std::make_shared<LineSeries>(r, d.dirs[i - 1], s.x0);
    TimeProfile amp;
    const double e = s.eta / (2 * pi);
    amp.value = [&, e](double t) { return e * p.cutoff(k, i, t); };
    amp.rate = [&, e](double t) { return e * p.cutoff_rate(k, i, t); };
    TrajectoryOptions opt;
    opt.anchor = s.anchor;
    const auto [qa, qb] = p.quarter(k, i);
    const Trajectory traj(line, amp, d.dirs[i - 1], s.x0, qa, qb, 1.0, opt);
    const double T = traj.time_to_travel(d.dirs[i - 1].period) - s.anchor;
    CHECK(T == doctest::Approx(info.T).epsilon(1e-8));
    for (int m : {1, info.M}) {
        const BlockState st = traj.state(s.anchor + m * info.T);
        // closure relative to the distance travelled
        CHECK(minimal_image(st.center - s.x0, 1.0).norm() < 1e-9 * m * d.dirs[i - 1].period);
    }
    CHECK(traj.state(qa).s < 0);
}
