#include "eulerci/stress_decomposition.hpp"

#include "eulerci/mollify.hpp"

namespace eulerci {

DirectionSet build_directions(int lambda) {
    if (lambda < 8) throw std::invalid_argument("lambda must be at least 8");
    if (lambda % 2) throw std::invalid_argument("lambda must be even");
    DirectionSet s;
    s.lambda = lambda;
    const double c = lambda / std::hypot(double(lambda), 1.0), sn = 1.0 / std::hypot(double(lambda), 1.0);
    s.rotation << c, -sn, sn, c;
    const int l = lambda;
    const std::array<Eigen::Vector2i, 4> v{Eigen::Vector2i(l, 1), Eigen::Vector2i(-1, l), Eigen::Vector2i(l - 1, l + 1),
                                           Eigen::Vector2i(l + 1, 1 - l)};
    for (int i = 0; i < 4; ++i) s.dirs[i] = make_direction(v[i], 1.0, lambda);
    return s;
}

std::array<double, 4> frame_coefficients(const Mat2& M) {
    return {M(0, 0) - M(0, 1) - 0.5, M(1, 1) - M(0, 1) - 0.5, 2.0 * M(0, 1) + 0.5, 0.5};
}

MatrixDecomposition decompose_matrix(const Mat2& R, const DirectionSet& d, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    MatrixDecomposition out;
    out.varsigma = 16.0 * std::sqrt(R.squaredNorm() + delta * delta);
    const Mat2 M = Mat2::Identity() - R / out.varsigma;
    const Mat2& K = d.rotation;
    const auto g = frame_coefficients(K.transpose() * M * K);
    for (int i = 0; i < 4; ++i) out.a[i] = out.varsigma * g[i];
    return out;
}

Mat2 reconstruct(const MatrixDecomposition& m, const DirectionSet& d) {
    Mat2 acc = Mat2::Zero();
    for (int i = 0; i < 4; ++i) acc += m.a[i] * d.dirs[i].xi * d.dirs[i].xi.transpose();
    return acc;
}

FieldDecomposition decompose_field(const SymTensorField& R, const DirectionSet& d, double delta) {
    const auto& g = R.grid;
    FieldDecomposition out;
    for (auto& a : out.a) a = ScalarField(g);
    out.varsigma = ScalarField(g);
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            Mat2 m;
            m << R[0](i, j), R[1](i, j), R[1](i, j), R[2](i, j);
            const MatrixDecomposition dm = decompose_matrix(m, d, delta);
            for (int k = 0; k < 4; ++k) out.a[k][0](i, j) = dm.a[k];
            out.varsigma[0](i, j) = dm.varsigma;
        }
    return out;
}

double reconstruction_error(const FieldDecomposition& f, const SymTensorField& R, const DirectionSet& d) {
    const auto& g = R.grid;
    double worst = 0;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            Mat2 acc = Mat2::Zero();
            for (int k = 0; k < 4; ++k) acc += f.a[k][0](i, j) * d.dirs[k].xi * d.dirs[k].xi.transpose();
            Mat2 m;
            m << R[0](i, j), R[1](i, j), R[1](i, j), R[2](i, j);
            acc += m - f.varsigma[0](i, j) * Mat2::Identity();
            worst = std::max(worst, acc.norm());
        }
    return worst;
}

SymTensorField rank_one(const ScalarField& a, const Vec2& xi) {
    SymTensorField t(a.grid);
    t[0] = a[0] * (xi[0] * xi[0]);
    t[1] = a[0] * (xi[0] * xi[1]);
    t[2] = a[0] * (xi[1] * xi[1]);
    return t;
}

// ------------------------------------------------------------------ time partition

TimePartition::TimePartition(double tau_, int lambda_) : tau(tau_), lambda(lambda_) {
    const double inv = 1.0 / tau;
    if (!(tau > 0) || std::abs(inv - std::round(inv)) > 1e-9 * inv)
        throw std::invalid_argument("1/tau must be a positive integer");
    if (lambda < 8) throw std::invalid_argument("lambda must be at least 8");
}

std::pair<double, double> TimePartition::quarter(int k, int i) const {
    if (i < 1 || i > 4) throw std::out_of_range("quarter index must be 1..4");
    return {tau * (k + (i - 1) / 4.0), tau * (k + i / 4.0)};
}

std::pair<double, double> TimePartition::plateau(int k, int i) const {
    const auto [a, b] = quarter(k, i);
    return {a + ramp(), b - ramp()};
}

double TimePartition::cutoff(int k, int i, double t) const {
    const auto [a, b] = quarter(k, i);
    if (t <= a || t >= b) return 0.0;
    return smooth_step((t - a) / ramp()).v * smooth_step((b - t) / ramp()).v;
}

double TimePartition::cutoff_rate(int k, int i, double t) const {
    const auto [a, b] = quarter(k, i);
    if (t <= a || t >= b) return 0.0;
    const StepJet up = smooth_step((t - a) / ramp()), down = smooth_step((b - t) / ramp());
    return (up.d1 * down.v - up.v * down.d1) / ramp();
}

// ------------------------------------------------------------------ amplitude and start

StartSelection select_amplitude_and_start(const ScalarField& a_k, const Direction& d, const TimePartition& p, int k,
                                          int i, bool normalized) {
    const auto& g = a_k.grid;
    if (a_k[0].minCoeff() <= 0) throw std::invalid_argument("coefficient must be positive");
    StartSelection out;
    const double avg = a_k[0].mean();  // unit-area torus: the integral
    const double integral = avg * g.area();
    out.eta = std::sqrt((normalized ? 8.0 * std::numbers::pi : 4.0) * integral);
    out.anchor = p.plateau(k, i).first;

    // resonant modes: the line average through x0 depends on x0 only through them
    struct Mode {
        int m1, m2;
        std::complex<double> c;
    };
    std::vector<Mode> modes;
    const Spectrum2<double> s = fft2<double>(a_k[0]);
    const double norm = 1.0 / (double(g.N) * double(g.N));
    for (int j = 0; j < g.N; ++j)
        for (int ii = 0; ii < g.N; ++ii) {
            const int m1 = g.signed_mode(ii), m2 = g.signed_mode(j);
            if (ii == g.N / 2 || j == g.N / 2) continue;  // Nyquist modes are never resonant with a primitive v
            if (long(m1) * d.v[0] + long(m2) * d.v[1] != 0 || (m1 == 0 && m2 == 0)) continue;
            if (std::abs(s(ii, j)) * norm < 1e-15 * std::abs(avg)) continue;
            modes.push_back({m1, m2, s(ii, j) * norm});
        }
    const Vec2 n(-d.xi[1], d.xi[0]);
    const double spacing = g.L / d.v.cast<double>().norm();  // distance between strands of the closed line
    auto defect = [&](double w) {
        const Vec2 x = w * n;
        std::complex<double> acc = 0;
        for (const auto& m : modes)
            acc += m.c * std::exp(std::complex<double>(0, 2 * std::numbers::pi * (m.m1 * x[0] + m.m2 * x[1]) / g.L));
        return acc.real();
    };
    if (modes.empty()) {
        out.flat = true;
        out.x0 = Vec2::Zero();
        return out;
    }
    const int samples = 4 * p.lambda;
    double wa = 0, fa = defect(0);
    for (int m = 1; m <= samples; ++m) {
        const double wb = spacing * m / samples, fb = defect(wb);
        if (fa == 0.0) break;
        if ((fa < 0) != (fb < 0)) {
            double lo = wa, hi = wb, flo = fa;
            while (hi - lo > 1e-10 * spacing) {
                const double mid = 0.5 * (lo + hi), fm = defect(mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            wa = 0.5 * (lo + hi);
            fa = defect(wa);
            break;
        }
        wa = wb;
        fa = fb;
        if (m == samples) throw std::runtime_error("line average never crosses the torus average");
    }
    out.x0 = wrap_point(wa * n, g.L);
    out.line_defect = std::abs(fa);
    return out;
}

PeriodInfo period_bookkeeping(const Direction& d, int lambda, double scale, double eta, const TimePartition& p) {
    PeriodInfo out;
    out.T = d.c * lambda * scale * eta / 4.0;
    if (!(out.T > 0)) throw std::invalid_argument("period must be positive");
    const double span = p.tau * (0.25 - 2.0 / lambda);
    out.M = static_cast<int>(std::floor(span / out.T));
    out.window = span - out.M * out.T;
    out.enough = out.M >= lambda;
    return out;
}

double scale_for_period(const Direction& d, int lambda, double eta, double T) {
    if (!(T > 0 && eta > 0)) throw std::invalid_argument("period and amplitude must be positive");
    return 4.0 * T / (d.c * lambda * eta);
}

bool trajectory_budget_ok(int lambda, double scale, double delta, double tau) {
    return double(lambda) * lambda * scale * std::sqrt(delta) <= tau / 200.0;
}

}  // namespace eulerci
