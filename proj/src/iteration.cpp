#include "eulerci/iteration.hpp"

#include "eulerci/antidiv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace eulerci {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr auto colloc = ProductRule::collocation;

double to_double(const Rational& r) { return r.convert_to<double>(); }

VectorField drop_nyquist(const VectorField& v) {
    const auto& g = v.grid;
    VectorField out(g);
    for (int k = 0; k < 2; ++k)
        out[k] = apply_multiplier<double>(g, v[k], [&](int i, int j) {
            return std::complex<double>(i == g.N / 2 || j == g.N / 2 ? 0.0 : 1.0, 0);
        });
    return out;
}

}  // namespace

// ------------------------------------------------------------------ schedule

ParameterSchedule ParameterSchedule::paper(long lambda0) {
    ParameterSchedule s;
    s.lambda0 = lambda0;
    return s;
}

ParameterSchedule ParameterSchedule::toy(long lambda0) {
    ParameterSchedule s;
    s.mode = ScheduleMode::toy;
    s.lambda0 = lambda0;
    s.sigma = 2;
    s.beta = Rational(1, 5);
    s.mu = Rational(6, 5);
    s.kappa = 1;
    return s;
}

BigInt ParameterSchedule::lambda(int q) const {
    if (boost::multiprecision::denominator(sigma) != 1) throw std::invalid_argument("lambda_q needs an integer sigma");
    if (q < 0) throw std::invalid_argument("stage index must be non-negative");
    const BigInt e = boost::multiprecision::pow(boost::multiprecision::numerator(sigma), static_cast<unsigned>(q));
    if (e > 100000000) throw std::overflow_error("lambda_q has more than 10^8 binary digits");
    return boost::multiprecision::pow(BigInt(lambda0), e.convert_to<unsigned>());
}

double ParameterSchedule::log10_lambda(int q) const {
    return std::pow(to_double(sigma), q) * std::log10(static_cast<double>(lambda0));
}
double ParameterSchedule::log10_delta(int q) const {
    return to_double(beta) * (2.0 * log10_lambda(1) - log10_lambda(q));
}
double ParameterSchedule::log10_r(int q) const { return -to_double(mu) * log10_lambda(q); }
double ParameterSchedule::log10_tau(int q) const { return -to_double(kappa) * log10_lambda(q); }

double ParameterSchedule::delta(int q) const { return std::pow(10.0, log10_delta(q)); }
double ParameterSchedule::r(int q) const { return std::pow(10.0, log10_r(q)); }
double ParameterSchedule::tau(int q) const {
    const double inv = std::round(std::pow(10.0, -log10_tau(q)));
    return std::isfinite(inv) && inv >= 1 ? 1.0 / inv : 0.0;
}

// ------------------------------------------------------------------ constraints

std::vector<Constraint> check_constraints(const ParameterSchedule& s) {
    const Rational &n = s.n, &sg = s.sigma, &b = s.beta, &mu = s.mu, &k = s.kappa;
    const Rational two_over_p = Rational(2) / s.pbar;
    std::vector<Constraint> out;
    auto less0 = [&](std::string text, Rational lhs) { out.push_back({std::move(text), -lhs, false}); };
    auto more0 = [&](std::string text, Rational lhs) { out.push_back({std::move(text), lhs, false}); };
    auto less_n = [&](std::string text, Rational lhs) { out.push_back({std::move(text), n - lhs, false}); };

    less0("5 + 2n/sigma + 2beta - mu < 0", 5 + 2 * n / sg + 2 * b - mu);
    more0("mu - beta - 2 - kappa > 0", mu - b - 2 - k);
    less0("-9/10 + 3n/sigma + 3beta + beta sigma < 0", Rational(-9, 10) + 3 * n / sg + 3 * b + b * sg);
    less0("-kappa + 1 + 4n/sigma + 3beta + beta sigma < 0", -k + 1 + 4 * n / sg + 3 * b + b * sg);
    less0("-5 + n/sigma + beta < 0", -5 + n / sg + b);
    less0("-beta(-8/5 + 2/pbar) + mu(2 - 2/pbar) < 0", -b * (Rational(-8, 5) + two_over_p) + mu * (2 - two_over_p));
    less0("3n/sigma + 9beta/10 - kappa + 3 - 2/pbar < 0", 3 * n / sg + 9 * b / 10 - k + 3 - two_over_p);
    less_n("21beta/10 + 3mu/2 < n", 21 * b / 10 + 3 * mu / 2);
    less_n("3n/sigma + 6beta - kappa + 5/2 < n", 3 * n / sg + 6 * b - k + Rational(5, 2));
    less_n("2beta + 3mu < n", 2 * b + 3 * mu);
    less_n("3n/sigma + 3beta + 3/2 < n", 3 * n / sg + 3 * b + Rational(3, 2));
    for (auto& c : out) c.pass = c.margin > 0;
    return out;
}

bool all_pass(const std::vector<Constraint>& c) {
    return std::all_of(c.begin(), c.end(), [](const Constraint& x) { return x.pass; });
}

std::string format_rational(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1) os << "/" << boost::multiprecision::denominator(r);
    os.precision(10);
    os << " (" << to_double(r) << ")";
    return os.str();
}

std::vector<Mutant> single_exponent_mutants() {
    std::vector<Mutant> m;
    auto add = [&](std::string name, auto edit) {
        ParameterSchedule s = ParameterSchedule::paper();
        edit(s);
        m.push_back({std::move(name), s});
    };
    add("mu = 0", [](ParameterSchedule& s) { s.mu = 0; });
    add("mu = 5", [](ParameterSchedule& s) { s.mu = 5; });
    add("beta = 1/200", [](ParameterSchedule& s) { s.beta = Rational(1, 200); });
    add("kappa = 2", [](ParameterSchedule& s) { s.kappa = 2; });
    add("sigma = 100", [](ParameterSchedule& s) { s.sigma = 100; });
    add("n = 15", [](ParameterSchedule& s) { s.n = 15; });
    add("pbar = 1 + 1/1000", [](ParameterSchedule& s) { s.pbar = 1 + Rational(1, 1000); });
    return m;
}

// ------------------------------------------------------------------ stages

VectorField stage_residual(const StageState& s, double t, double dt) {
    VectorField du;
    if (s.u_rate) {
        du = s.u_rate(t);
    } else {
        du = central_difference4(s.u(t - 2 * dt), s.u(t - dt), s.u(t + dt), s.u(t + 2 * dt), dt);
    }
    const VectorField u = s.u(t);
    return du + tensor_divergence(outer_self(u, colloc)) + gradient(s.p(t)) - tensor_divergence(s.R(t));
}

double stage_cutoff(double t) { return 1.0 - smooth_step(4.0 * (t - 0.25)).v; }
double stage_cutoff_rate(double t) { return -4.0 * smooth_step(4.0 * (t - 0.25)).d1; }

double shear_amplitude(long lambda0, const ParameterSchedule& s) {
    return std::pow(static_cast<double>(lambda0), 0.75 * to_double(s.beta * s.sigma));
}

StageState stage0_shear(const TorusGrid& g, long lambda0, const ParameterSchedule& s) {
    if (2 * lambda0 >= g.N / 2) throw std::invalid_argument("shear frequency is not resolved by the grid");
    const double A = shear_amplitude(lambda0, s);
    const double w = two_pi * lambda0 / g.L;
    const ScalarField sn = sample<1>(g, [w](double, double y) { return std::sin(w * y); });
    const ScalarField cs = sample<1>(g, [w](double, double y) { return std::cos(w * y); });
    StageState st;
    st.q = 0;
    st.grid = g;
    st.u = [=](double t) {
        VectorField u(g);
        u[0] = (A * stage_cutoff(t)) * sn[0];
        return u;
    };
    st.u_rate = [=](double t) {
        VectorField u(g);
        u[0] = (A * stage_cutoff_rate(t)) * sn[0];
        return u;
    };
    st.p = [g](double) { return ScalarField(g); };
    st.R = [=](double t) {
        SymTensorField R(g);
        R[1] = (-A * stage_cutoff_rate(t) / w) * cs[0];
        return R;
    };
    return st;
}

EndpointStage stage0_endpoints(const VectorField& u_start, const VectorField& u_end, double eps, double ell_max) {
    u_start.check_same(u_end);
    const TorusGrid g = u_start.grid;
    require_mean_zero<double, 2>(u_start, 1e-10, "stage0_endpoints");
    require_mean_zero<double, 2>(u_end, 1e-10, "stage0_endpoints");
    const double scale = std::max({1.0, max_abs(u_start), max_abs(u_end)});
    if (max_abs(divergence(u_start)) > 1e-8 * scale / g.h() || max_abs(divergence(u_end)) > 1e-8 * scale / g.h())
        throw std::invalid_argument("stage0_endpoints: inputs must be divergence-free");
    if (!(eps > 0)) throw std::invalid_argument("stage0_endpoints: eps must be positive");

    EndpointStage out;
    double ell = ell_max;
    for (int n = 0;; ++n) {
        out.closeness = lp_norm(u_start - mollify_space<2>(u_start, ell), 2.0);
        if (out.closeness <= eps / 2) break;
        if (n == 60) throw std::runtime_error("stage0_endpoints: no mollification radius reaches eps/2");
        ell /= 2;
    }
    out.ell = ell;
    // Nyquist modes carry no derivative; removing them lets R0 reproduce the whole forcing.
    const VectorField a = drop_nyquist(mollify_space<2>(u_start, ell));
    const VectorField b = drop_nyquist(mollify_space<2>(u_end, ell));

    StageState& st = out.state;
    st.q = 0;
    st.grid = g;
    st.u = [=](double t) {
        const double c = stage_cutoff(t);
        return c * a + (1.0 - c) * b;
    };
    st.u_rate = [=](double t) { return stage_cutoff_rate(t) * (a - b); };
    st.p = [g](double) { return ScalarField(g); };
    st.R = [=](double t) {
        const double c = stage_cutoff(t);
        const VectorField u = c * a + (1.0 - c) * b;
        return symmetric_antidiv_projected(stage_cutoff_rate(t) * (a - b) + tensor_divergence(outer_self(u, colloc)));
    };
    return out;
}

StageState mollify_stage(const StageState& s, double ell, int time_nodes) {
    const TorusGrid g = s.grid;
    if (!(ell > 0)) throw std::invalid_argument("mollify_stage needs ell > 0");
    if (ell < 2 * g.h()) throw std::invalid_argument("mollification radius is below two grid spacings");
    if (time_nodes < 8 || time_nodes % 8) throw std::invalid_argument("time_nodes must be a positive multiple of 8");
    // composite 8-point Gauss panels on [-ell, ell]; weights renormalized to sum one
    const auto& rule = detail::gauss_legendre_rule(8);
    const int panels = time_nodes / 8;
    std::vector<std::pair<double, double>> nodes;
    double total = 0;
    for (int m = 0; m < panels; ++m) {
        const double lo = -1.0 + 2.0 * m / panels, half = 1.0 / panels;
        for (const auto& [x, w] : rule) {
            const double sn = lo + half * (x + 1.0);
            const double wt = half * w * bump_kernel_1d(sn);
            nodes.emplace_back(sn * ell, wt);
            total += wt;
        }
    }
    for (auto& n : nodes) n.second /= total;

    auto conv = [nodes](auto f) {
        return [f, nodes](double t) {
            auto acc = f(t - nodes[0].first);
            acc *= nodes[0].second;
            for (std::size_t m = 1; m < nodes.size(); ++m) acc += nodes[m].second * f(t - nodes[m].first);
            return acc;
        };
    };
    StageState out;
    out.q = s.q;
    out.grid = g;
    const auto u_t = conv(s.u);
    out.u = [u_t, ell](double t) { return mollify_space<2>(u_t(t), ell); };
    if (s.u_rate) {
        const auto r_t = conv(s.u_rate);
        out.u_rate = [r_t, ell](double t) { return mollify_space<2>(r_t(t), ell); };
    }
    const auto p_t = conv(s.p);
    out.p = [p_t, ell](double t) { return mollify_space<1>(p_t(t), ell); };
    const auto R_t = conv(s.R);
    const auto uu_t = conv([u = s.u](double t) { return outer_self(u(t), colloc); });
    out.R = [R_t, uu_t, u_t, ell](double t) {
        const VectorField ul = mollify_space<2>(u_t(t), ell);
        return mollify_space<3>(R_t(t), ell) + outer_self(ul, colloc) - mollify_space<3>(uu_t(t), ell);
    };
    return out;
}

// ------------------------------------------------------------------ assembly

AssembledStage assemble_stage(const StageState& s, const ToyParameters& tp) {
    const TorusGrid g = s.grid;
    const DirectionSet dirs = build_directions(tp.lambda);
    const TimePartition part(tp.tau, tp.lambda);
    const int k = tp.interval;
    const auto [t0, t1] = part.interval(k);
    const StageState ml = mollify_stage(s, tp.ell);

    // time-averaged coefficients a_i^k
    std::array<ScalarField, 4> ak;
    {
        const int n = tp.average_panels;
        if (n < 2 || n % 2) throw std::invalid_argument("average_panels must be even and >= 2");
        for (auto& a : ak) a = ScalarField(g);
        const double h = (t1 - t0) / n;
        for (int m = 0; m <= n; ++m) {
            const double w = (m == 0 || m == n ? 1.0 : (m % 2 ? 4.0 : 2.0)) * h / 3.0 / (t1 - t0);
            const FieldDecomposition d = decompose_field(ml.R(t0 + m * h), dirs, tp.delta);
            for (int i = 0; i < 4; ++i) ak[i] += w * d.a[i];
        }
    }

    AssembledStage out;
    double amax = 0;
    for (const auto& a : ak) amax = std::max(amax, a[0].maxCoeff());
    out.scale = tp.scale > 0 ? tp.scale : tp.r_max / amax;
    BlockSetup setup = tp.block;
    setup.normalized = true;
    std::array<std::unique_ptr<MovingBlock>, 4> blocks;
    for (int i = 1; i <= 4; ++i) {
        out.cells[i - 1] = build_cell(ak[i - 1], dirs, part, k, i, out.scale, true);
        blocks[i - 1] = std::make_unique<MovingBlock>(g, out.cells[i - 1].traj, setup);
        if (2 * blocks[i - 1]->grid_support_radius(out.scale * amax) >= g.L)
            throw std::invalid_argument("assemble_stage: block support does not fit in the torus");
    }

    // sample times: interval ends, then plateau and ramp midpoints of each quarter
    struct Sample {
        double t;
        int quarter;
    };
    std::vector<Sample> samples{{t0, 0}};
    for (int i = 1; i <= 4; ++i) {
        const auto [pa, pb] = part.plateau(k, i);
        if (tp.samples_per_quarter >= 1) samples.push_back({0.5 * (pa + pb), i});
        if (tp.samples_per_quarter >= 2) samples.push_back({out.cells[i - 1].begin + 0.5 * part.ramp(), i});
    }
    samples.push_back({t1, 0});
    std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });

    const double dt = tp.dt;
    const std::vector<double> offsets{-2 * dt, -dt, dt, 2 * dt};
    std::vector<double> queries;
    for (const auto& sm : samples) {
        queries.push_back(sm.t);
        if (sm.quarter)
            for (double o : offsets) queries.push_back(sm.t + o);
    }
    CorrectorSamples corr = build_time_corrector({&out.cells[0], &out.cells[1], &out.cells[2], &out.cells[3]},
                                                       g, tp.tau, queries, tp.quadrature);
    // The profile is sampled pointwise; its Nyquist modes have no divergence form, so the whole
    // auxiliary chain (U, its average and the corrector) runs without them.
    for (auto& Q : corr.Q) Q = drop_nyquist(Q);
    corr.PtauU = drop_nyquist(corr.PtauU);
    for (auto& P : corr.PtauU_cell) P = drop_nyquist(P);
    auto Q_at = [&](double t) -> const VectorField& {
        const auto it = std::find(corr.times.begin(), corr.times.end(), t);
        if (it == corr.times.end()) throw std::logic_error("corrector query missing");
        return corr.Q[it - corr.times.begin()];
    };

    SymTensorField G(g);
    for (int i = 0; i < 4; ++i) {
        const SymTensorField Gi = symmetric_antidiv_projected(
            corr.PtauU_cell[i] - tensor_divergence(rank_one(ak[i], dirs.dirs[i].xi)));
        out.G_L1[i] = lp_norm(Gi, 1.0);
        G += Gi;
    }
    SymTensorField frozen_avg(g);
    for (int i = 0; i < 4; ++i) frozen_avg += rank_one(ak[i], dirs.dirs[i].xi);

    for (const auto& sm : samples) {
        StageSampleReport rep;
        rep.t = sm.t;
        rep.quarter = sm.quarter;
        const VectorField ul = ml.u(sm.t);
        const VectorField& Q = Q_at(sm.t);
        rep.Q_max = max_abs(Q);
        const SymTensorField Rl = ml.R(sm.t);
        const FieldDecomposition dec = decompose_field(Rl, dirs, tp.delta);
        SymTensorField Rt = frozen_avg;
        for (int i = 0; i < 4; ++i) Rt -= rank_one(dec.a[i], dirs.dirs[i].xi);
        ScalarField p = ml.p(sm.t) - dec.varsigma;

        VectorField u = ul + Q;
        SymTensorField Rlin(g), Rcor(g), Rsrc(g), Fb(g);
        if (sm.quarter == 0) {
            // no block is active at the interval ends
            rep.boundary_delta = max_abs(u - ul);
            out.max_boundary = std::max(out.max_boundary, rep.boundary_delta);
            Rcor = outer_self(Q, colloc);
            Rcor += sym_outer(Q, ul, colloc);
        } else {
            const MovingBlock& blk = *blocks[sm.quarter - 1];
            const Cell& cell = out.cells[sm.quarter - 1];
            const BlockFrame f = blk.frame(sm.t);
            u += f.V;
            p += blk.pressure(f, dt);
            const VectorField U = drop_nyquist(sample_U(cell, g, sm.t, tp.quadrature.unit_mean));
            p -= inverse_laplacian(divergence(U - corr.PtauU));
            Rlin = sym_outer(f.V, ul, colloc);
            Rcor = sym_outer(Q, ul + f.V, colloc) + outer_self(Q, colloc);
            Rsrc = symmetric_antidiv_projected(f.source_rate * f.S - U);
            Fb = f.F;

            // du/dt by fourth-order differences of all three parts
            const auto st = blk.trajectory().states_near(sm.t, offsets);
            std::array<VectorField, 4> un;
            for (int m = 0; m < 4; ++m) {
                const double tm = sm.t + offsets[m];
                un[m] = ml.u(tm) + leray_project(blk.principal(st[m])) + Q_at(tm);
            }
            const VectorField du = central_difference4(un[0], un[1], un[2], un[3], dt);
            SymTensorField R = Rlin + Rcor + Rt + Rsrc + Fb + G;
            const VectorField res = du + tensor_divergence(outer_self(u, colloc)) + gradient(p) - tensor_divergence(R);
            rep.residual_L2 = lp_norm(res, 2.0);
            rep.rate_L2 = lp_norm(du, 2.0);
            rep.relative = rep.residual_L2 / rep.rate_L2;
            out.max_relative = std::max(out.max_relative, rep.relative);
        }
        const SymTensorField R = Rlin + Rcor + Rt + Rsrc + Fb + G;
        rep.div_max = max_abs(divergence(u));
        out.max_div = std::max(out.max_div, rep.div_max);
        rep.stress_L1 = {lp_norm(Rlin, 1.0), lp_norm(Rcor, 1.0), lp_norm(Rt, 1.0),
                         lp_norm(Rsrc, 1.0), lp_norm(Fb, 1.0),   lp_norm(G, 1.0)};
        out.samples.push_back(rep);
        out.u.push_back(u);
        out.p.push_back(p);
        out.R.push_back(R);
        out.u_ell.push_back(ul);
    }
    return out;
}

// ------------------------------------------------------------------ diagnostics

StageDiagnostics diagnose(const VectorField& u, const SymTensorField& R, double pbar, double p, double t) {
    StageDiagnostics d;
    d.t = t;
    d.R_L1 = lp_norm(R, 1.0);
    d.u_L2 = lp_norm(u, 2.0);
    TorusField<double, 4> Du(u.grid);
    for (int c = 0; c < 2; ++c)
        for (int axis = 0; axis < 2; ++axis) Du[2 * c + axis] = partial<double>(u.grid, u[c], axis);
    d.Du_Lpbar = lp_norm(Du, pbar);
    d.vort_Lp = lp_norm(curl2d(u), p);
    return d;
}

ScalarField curl_fd(const VectorField& u) {
    const auto& g = u.grid;
    const int N = g.N;
    const double h = g.h();
    ScalarField w(g);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int ip = (i + 1) % N, im = (i + N - 1) % N, jp = (j + 1) % N, jm = (j + N - 1) % N;
            w[0](i, j) = (u[1](ip, j) - u[1](im, j) - u[0](i, jp) + u[0](i, jm)) / (2 * h);
        }
    return w;
}

}  // namespace eulerci
