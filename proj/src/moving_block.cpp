#include "eulerci/moving_block.hpp"

#include "eulerci/antidiv.hpp"
#include "eulerci/mollify.hpp"

#include <boost/numeric/odeint.hpp>

#include <numeric>

namespace eulerci {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Unit-mass radial bump of radius 1/2 and its radial derivative.
double core_bump(double s) { return 4.0 * bump_kernel_2d(2.0 * s); }
double core_bump_slope(double s) {
    const double u = 2.0 * s;
    if (u >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return 8.0 * bump_kernel_2d(u) * (-2.0 * u / (q * q));
}

}  // namespace

Direction make_direction(const Eigen::Vector2i& v, double L, double lambda) {
    if (v.isZero()) throw std::invalid_argument("direction vector must be non-zero");
    if (std::gcd(std::abs(v[0]), std::abs(v[1])) != 1) throw std::invalid_argument("direction vector must be primitive");
    Direction d;
    d.v = v;
    d.xi = v.cast<double>().normalized();
    d.period = v.cast<double>().norm() * L;
    d.c = lambda > 0 ? d.period / (lambda * L) : 0.0;
    return d;
}

Vec2 wrap_point(const Vec2& x, double L) {
    Vec2 y;
    for (int k = 0; k < 2; ++k) {
        y[k] = std::fmod(x[k], L);
        if (y[k] < 0) y[k] += L;
        if (y[k] >= L) y[k] -= L;
    }
    return y;
}

Vec2 minimal_image(const Vec2& d, double L) {
    Vec2 y;
    for (int k = 0; k < 2; ++k) y[k] = d[k] - L * std::round(d[k] / L);
    return y;
}

// ------------------------------------------------------------------ line series

namespace {

// Signed integer modes of grid index m; the Nyquist index is a cosine split between +-N/2.
template <class F>
void for_each_mode(const TorusGrid& g, int m, F&& f) {
    if (m == g.N / 2) {
        f(g.N / 2, 0.5);
        f(-g.N / 2, 0.5);
    } else {
        f(g.signed_mode(m), 1.0);
    }
}

}  // namespace

LineSeries::LineSeries(const ScalarField& f, const Direction& d, const Vec2& x0, double drop_tol) {
    const auto& g = f.grid;
    const Spectrum2<double> s = fft2<double>(f[0]);
    const double norm = 1.0 / (double(g.N) * double(g.N));
    std::map<long, std::complex<double>> acc;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i) {
            if (s(i, j) == 0.0) continue;
            for_each_mode(g, i, [&](int m1, double w1) {
                for_each_mode(g, j, [&](int m2, double w2) {
                    const double phase = two_pi * (m1 * x0[0] + m2 * x0[1]) / g.L;
                    const long n = long(m1) * d.v[0] + long(m2) * d.v[1];
                    acc[n] += (w1 * w2 * norm) * s(i, j) * std::exp(std::complex<double>(0, phase));
                });
            });
        }
    double big = 0;
    for (const auto& [n, c] : acc) big = std::max(big, std::abs(c));
    period_ = d.period;
    mean_ = acc.count(0) ? acc[0].real() : 0.0;
    for (const auto& [n, c] : acc)
        if (std::abs(c) > drop_tol * big) {
            n_.push_back(two_pi * double(n) / period_);
            c_.push_back(c);
        }
}

double LineSeries::value(double s) const {
    std::complex<double> acc = 0;
    for (std::size_t k = 0; k < n_.size(); ++k) acc += c_[k] * std::exp(std::complex<double>(0, n_[k] * s));
    return acc.real();
}

double LineSeries::derivative(double s) const {
    std::complex<double> acc = 0;
    for (std::size_t k = 0; k < n_.size(); ++k)
        acc += c_[k] * std::complex<double>(0, n_[k]) * std::exp(std::complex<double>(0, n_[k] * s));
    return acc.real();
}

double line_average(const ScalarField& f, const Direction& d, const Vec2& x0) {
    const auto& g = f.grid;
    const Spectrum2<double> s = fft2<double>(f[0]);
    const double norm = 1.0 / (double(g.N) * double(g.N));
    std::complex<double> acc = 0;
    for (int j = 0; j < g.N; ++j)
        for (int i = 0; i < g.N; ++i)
            for_each_mode(g, i, [&](int m1, double w1) {
                for_each_mode(g, j, [&](int m2, double w2) {
                    if (long(m1) * d.v[0] + long(m2) * d.v[1] != 0) return;
                    const double phase = two_pi * (m1 * x0[0] + m2 * x0[1]) / g.L;
                    acc += (w1 * w2 * norm) * s(i, j) * std::exp(std::complex<double>(0, phase));
                });
            });
    return acc.real();
}

TimeProfile constant_profile(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

// ------------------------------------------------------------------ trajectory

Trajectory::Trajectory(std::shared_ptr<const LineSeries> scale, TimeProfile amplitude, const Direction& d,
                       const Vec2& x0, double t0, double t1, double L, TrajectoryOptions opt)
    : scale_(std::move(scale)), amp_(std::move(amplitude)), dir_(d), x0_(x0), L_(L) {
    if (!(t1 > t0)) throw std::invalid_argument("trajectory needs t1 > t0");
    anchor_ = std::isnan(opt.anchor) ? t0 : opt.anchor;
    if (anchor_ < t0 || anchor_ > t1) throw std::invalid_argument("trajectory anchor outside [t0, t1]");
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 1>;
    auto sys = [this](const State& s, State& ds, double t) { ds[0] = rhs(t, s[0]); };
    // integrate from the anchor towards `end`, recording every accepted step
    auto sweep = [&](double end, std::vector<double>& ts, std::vector<double>& ss) {
        auto stepper = ode::make_controlled(opt.tol, opt.tol, ode::runge_kutta_dopri5<State>());
        const double span = std::abs(end - anchor_);
        if (span == 0.0) return;
        const double dir = end > anchor_ ? 1.0 : -1.0;
        State s{0.0};
        double t = anchor_;
        double dt = dir * std::min(span * 1e-3, opt.max_step > 0 ? opt.max_step : INFINITY);
        while (dir * (end - t) > 0) {
            if (dir * (t + dt - end) > 0) dt = end - t;
            const double before = t;
            if (stepper.try_step(sys, s, t, dt) == ode::success) {
                if (t == before) throw std::runtime_error("trajectory step did not advance");
                ts.push_back(t);
                ss.push_back(s[0]);
                if (opt.max_step > 0 && std::abs(dt) > opt.max_step) dt = dir * opt.max_step;
            }
            if (std::abs(dt) < 1e-14 * span) throw std::runtime_error("trajectory step size underflow");
        }
        ts.back() = end;
    };
    std::vector<double> tb, sb, tf, sf;
    sweep(t0, tb, sb);
    sweep(t1, tf, sf);
    t_.assign(tb.rbegin(), tb.rend());
    s_.assign(sb.rbegin(), sb.rend());
    t_.push_back(anchor_);
    s_.push_back(0.0);
    t_.insert(t_.end(), tf.begin(), tf.end());
    s_.insert(s_.end(), sf.begin(), sf.end());
}

double Trajectory::rhs(double t, double s) const {
    const double r = scale_->value(s);
    if (!(r > 0)) throw std::domain_error("block scale must stay positive along the line");
    return amp_.value(t) / r;
}

double Trajectory::rhs_dot(double t, double s) const {
    const double r = scale_->value(s), v = amp_.value(t) / r;
    return amp_.rate(t) / r - v * scale_->derivative(s) * v / r;
}

BlockState Trajectory::make_state(double t, double s) const {
    BlockState st;
    st.t = t;
    st.s = s;
    st.center = wrap_point(x0_ + s * dir_.xi, L_);
    st.r = scale_->value(s);
    st.e = amp_.value(t);
    st.e_rate = amp_.rate(t);
    st.r_rate = scale_->derivative(s) * st.e / st.r;
    return st;
}

BlockState Trajectory::state(double t) const {
    if (t < t_.front() - 1e-14 || t > t_.back() + 1e-14) throw std::out_of_range("time outside the trajectory");
    t = std::clamp(t, t_.front(), t_.back());
    std::size_t k = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin();
    k = std::clamp<std::size_t>(k, 1, t_.size() - 1);
    const double ta = t_[k - 1], tb = t_[k], h = tb - ta;
    const double sa = s_[k - 1], sb = s_[k];
    // quintic Hermite from values, first and second derivatives at both ends
    const double da = rhs(ta, sa) * h, db = rhs(tb, sb) * h;
    const double qa = rhs_dot(ta, sa) * h * h, qb = rhs_dot(tb, sb) * h * h;
    const double u = (t - ta) / h, u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const double h0 = 1 - 10 * u3 + 15 * u4 - 6 * u5, h1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    const double h2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5), h3 = 0.5 * (u3 - 2 * u4 + u5);
    const double h4 = -4 * u3 + 7 * u4 - 3 * u5, h5 = 10 * u3 - 15 * u4 + 6 * u5;
    const double s = h0 * sa + h1 * da + h2 * qa + h3 * qb + h4 * db + h5 * sb;
    return make_state(t, s);
}

std::vector<BlockState> Trajectory::states_near(double t, const std::vector<double>& offsets) const {
    const BlockState base = state(t);
    std::vector<BlockState> out;
    out.reserve(offsets.size());
    for (double off : offsets) {
        // classical RK4 with at most 32 substeps per offset
        const int n = 32;
        const double h = off / n;
        double s = base.s, tt = t;
        for (int k = 0; k < n && off != 0.0; ++k) {
            const double k1 = rhs(tt, s), k2 = rhs(tt + h / 2, s + h * k1 / 2);
            const double k3 = rhs(tt + h / 2, s + h * k2 / 2), k4 = rhs(tt + h, s + h * k3);
            s += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
            tt += h;
        }
        out.push_back(make_state(t + off, s));
    }
    return out;
}

double Trajectory::time_to_travel(double length) const {
    if (length > s_.back() || length < s_.front()) throw std::out_of_range("arclength not reached by the trajectory");
    std::size_t k = std::lower_bound(s_.begin(), s_.end(), length) - s_.begin();
    if (k == 0) return t_.front();
    double a = t_[k - 1], b = t_[k];
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        (state(m).s < length ? a : b) = m;
    }
    return 0.5 * (a + b);
}

double Trajectory::ode_residual(int samples) const {
    double worst = 0;
    const double span = t_.back() - t_.front(), dt = span * 1e-6;
    for (int k = 1; k < samples; ++k) {
        const double t = t_.front() + span * k / samples;
        if (t - 2 * dt < t_.front() || t + 2 * dt > t_.back()) continue;
        const double sd = central_difference4(state(t - 2 * dt).s, state(t - dt).s, state(t + dt).s,
                                              state(t + 2 * dt).s, dt);
        const BlockState st = state(t);
        worst = std::max(worst, std::abs(sd - st.e / st.r));
    }
    return worst;
}

// ------------------------------------------------------------------ block

MovingBlock::MovingBlock(const TorusGrid& g, std::shared_ptr<const Trajectory> traj, BlockSetup setup)
    : grid_(g), traj_(std::move(traj)), setup_(setup) {
    if (!traj_) throw std::invalid_argument("moving block needs a trajectory");
    if (!(setup_.alpha > 0 && setup_.alpha < 1)) throw std::invalid_argument("cutoff exponent must be in (0,1)");
}

double MovingBlock::amplitude_factor() const { return setup_.normalized ? 1.0 / two_pi : 1.0; }

struct MovingBlock::Samples {
    std::vector<std::pair<int, int>> idx;
    std::vector<Vec2> Wt;      // W plus the mean correction
    std::vector<Vec2> dVp_dt;  // analytic time derivative of e * Wt
    std::vector<double> P_local;
    Vec2 correction = Vec2::Zero();
};

// Samples the rotated profile W(Q^t y) at the grid points inside the support, y the minimal
// image displacement from the center. A small multiple of a unit-mass core bump is added so that
// the discrete integral of the profile is exactly 2 pi r xi at every time.
MovingBlock::Samples MovingBlock::sample(const BlockState& st, bool full) const {
    DipoleParams p;
    p.r = st.r;
    p.alpha = setup_.alpha;
    p.smoothing = setup_.smoothing;
    p.validate(0.5 * grid_.L);
    const DipoleBlock block(p);
    const Vec2 xi = traj_->direction().xi;
    Mat2 Q;
    Q << xi[0], -xi[1], xi[1], xi[0];
    const double R = support_radius(st.r), h = grid_.h(), cell = h * h, r = st.r;
    const Vec2 vel = (st.e / r) * xi;

    Samples out;
    struct Raw {
        Vec2 y, W, dWr, psi_grad;
        Mat2 dW;
        double P1, P2, psi, psi_r;
    };
    std::vector<Raw> raw;
    const int lo0 = int(std::floor((st.center[0] - R) / h)), hi0 = int(std::ceil((st.center[0] + R) / h));
    const int lo1 = int(std::floor((st.center[1] - R) / h)), hi1 = int(std::ceil((st.center[1] + R) / h));
    Vec2 I = Vec2::Zero(), It = Vec2::Zero();
    double B = 0, Bt = 0;
    for (int b = lo1; b <= hi1; ++b)
        for (int a = lo0; a <= hi0; ++a) {
            const Vec2 y = minimal_image(Vec2(a * h, b * h) - st.center, grid_.L);
            const double rho = y.norm();
            if (rho >= R) continue;
            const int i = ((a % grid_.N) + grid_.N) % grid_.N, j = ((b % grid_.N) + grid_.N) % grid_.N;
            const BlockSample s = block.sample(Q.transpose() * y);
            Raw q;
            q.y = y;
            q.W = Q * s.W;
            q.dW = Q * s.dW * Q.transpose();
            q.dWr = Q * s.dW_dr;
            q.P1 = s.P1;
            q.P2 = s.P2;
            const double u = rho / r;
            q.psi = core_bump(u) / (r * r);
            const double slope = core_bump_slope(u);
            q.psi_grad = rho > 0 ? Vec2(slope / (r * r * r) * y / rho) : Vec2::Zero();
            q.psi_r = -(2.0 * core_bump(u) + u * slope) / (r * r * r);
            I += cell * q.W;
            It += cell * (-q.dW * vel + st.r_rate * q.dWr);
            B += cell * q.psi;
            Bt += cell * (-q.psi_grad.dot(vel) + st.r_rate * q.psi_r);
            out.idx.emplace_back(i, j);
            raw.push_back(q);
        }
    if (!(B > 0)) throw std::runtime_error("block core is not resolved by the grid");
    const Vec2 c = (two_pi * r * xi - I) / B;
    const Vec2 c_rate = (two_pi * st.r_rate * xi - It - c * Bt) / B;
    out.correction = c;
    out.Wt.reserve(raw.size());
    for (const Raw& q : raw) out.Wt.push_back(q.W + c * q.psi);
    if (!full) return out;
    out.dVp_dt.reserve(raw.size());
    out.P_local.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const Raw& q = raw[k];
        const Vec2 transport = q.dW * vel + c * q.psi_grad.dot(vel);
        const Vec2 scale_part = st.r_rate * (q.dWr + c * q.psi_r) + c_rate * q.psi;
        out.dVp_dt.push_back(st.e_rate * out.Wt[k] + st.e * (-transport + scale_part));
        out.P_local.push_back(st.e * st.e * q.P1 - st.e * st.r_rate * q.P2);
    }
    return out;
}

VectorField MovingBlock::principal(const BlockState& st) const {
    const Samples s = sample(st, false);
    VectorField v(grid_);
    for (std::size_t k = 0; k < s.idx.size(); ++k) {
        const auto [i, j] = s.idx[k];
        v[0](i, j) = st.e * s.Wt[k][0];
        v[1](i, j) = st.e * s.Wt[k][1];
    }
    return binomial_filter(v);
}

BlockFrame MovingBlock::frame(const BlockState& st) const {
    const Samples s = sample(st, true);
    BlockFrame f;
    f.state = st;
    f.Vp = VectorField(grid_);
    f.S = VectorField(grid_);
    f.dVp_dt = VectorField(grid_);
    f.P_local = ScalarField(grid_);
    const double kappa = setup_.normalized ? two_pi : 1.0;
    for (std::size_t k = 0; k < s.idx.size(); ++k) {
        const auto [i, j] = s.idx[k];
        for (int c = 0; c < 2; ++c) {
            f.Vp[c](i, j) = st.e * s.Wt[k][c];
            f.S[c](i, j) = s.Wt[k][c] / (kappa * st.r);
            f.dVp_dt[c](i, j) = s.dVp_dt[k][c];
        }
        f.P_local[0](i, j) = s.P_local[k];
    }
    f.Vp = binomial_filter(f.Vp);
    f.S = binomial_filter(f.S);
    f.dVp_dt = binomial_filter(f.dVp_dt);
    f.mean_correction = s.correction;
    f.source_rate = source_rate(st, setup_.normalized);

    const auto rule = ProductRule::collocation;
    VectorField Z = f.dVp_dt + tensor_divergence(outer_self(f.Vp, rule)) + gradient(f.P_local) - f.source_rate * f.S;
    f.F3 = symmetric_antidiv_projected(Z, &f.dropped_mean);
    f.V = leray_project(f.Vp);
    f.Vc = f.V - f.Vp;
    f.F = f.F3 + sym_outer(f.Vp, f.Vc, rule) + outer_self(f.Vc, rule);
    return f;
}

ScalarField MovingBlock::pressure_rate(double t, double dt) const {
    const auto st = traj_->states_near(t, {-2 * dt, -dt, dt, 2 * dt});
    std::array<ScalarField, 4> q;
    for (int k = 0; k < 4; ++k) q[k] = inverse_laplacian(divergence(principal(st[k])));
    return central_difference4(q[0], q[1], q[2], q[3], dt);
}

ScalarField MovingBlock::pressure(const BlockFrame& f, double dt) const {
    return f.P_local + pressure_rate(f.state.t, dt);
}

VectorField MovingBlock::residual(double t, double dt) const {
    const auto st = traj_->states_near(t, {-2 * dt, -dt, dt, 2 * dt});
    std::array<VectorField, 4> v;
    for (int k = 0; k < 4; ++k) v[k] = leray_project(principal(st[k]));
    const VectorField dV = central_difference4(v[0], v[1], v[2], v[3], dt);
    const BlockFrame f = frame(t);
    const auto rule = ProductRule::collocation;
    const ScalarField P = pressure(f, dt);
    return dV + tensor_divergence(outer_self(f.V, rule)) + gradient(P) - f.source_rate * f.S -
           tensor_divergence(f.F);
}

}  // namespace eulerci
