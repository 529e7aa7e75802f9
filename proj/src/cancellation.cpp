#include "eulerci/cancellation.hpp"

#include "eulerci/antidiv.hpp"
#include "eulerci/mollify.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>

namespace eulerci {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double core = 2.0;  // support radius of Omega0

double omega0(double rho) {
    static const double top = bump(0.5);
    return bump(rho / core) / top;
}

double omega0_derivative(double rho) {
    static const double top = bump(0.5);
    const double s = rho / core, q = 1.0 - s * s;
    if (q <= 0) return 0.0;
    return bump(s) * (-2.0 * s / (q * q)) / (core * top);
}

// Periodic cubic Lagrange interpolation on a uniform table (u in table units).
double periodic_cubic(const std::vector<double>& tab, double u) {
    const int n = static_cast<int>(tab.size());
    const double fl = std::floor(u);
    const double t = u - fl;
    int i = static_cast<int>(fl) % n;
    if (i < 0) i += n;
    const double f0 = tab[(i + n - 1) % n], f1 = tab[i], f2 = tab[(i + 1) % n], f3 = tab[(i + 2) % n];
    const double a = t + 1, b = t, c = t - 1, d = t - 2;
    return -f0 * b * c * d / 6 + f1 * a * c * d / 2 - f2 * a * b * d / 2 + f3 * a * b * c / 6;
}

template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
    using boost::math::quadrature::gauss;
    double acc = 0;
    for (int p = 0; p < panels; ++p)
        acc += gauss<double, 20>::integrate(f, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels);
    return acc;
}

}  // namespace

double auxiliary_chord(double w) {
    w = std::abs(w);
    if (w >= core) return 0.0;
    const double top = std::sqrt(core * core - w * w);
    return 2.0 * composite_gauss([w](double t) { return omega0(std::hypot(w, t)); }, 0.0, top, 8);
}

double auxiliary_chord_derivative(double w) {
    const double aw = std::abs(w);
    if (aw >= core || aw == 0.0) return 0.0;
    const double top = std::sqrt(core * core - aw * aw);
    const double d = 2.0 * composite_gauss(
                               [aw](double t) {
                                   const double rho = std::hypot(aw, t);
                                   return omega0_derivative(rho) * aw / rho;
                               },
                               0.0, top, 8);
    return w < 0 ? -d : d;
}

// ------------------------------------------------------------------ profile

AuxiliaryProfile::AuxiliaryProfile(const Direction& d, double lambda, double L, int table)
    : dir_(d), normal_(-d.xi[1], d.xi[0]), lambda_(lambda), L_(L) {
    if (!(lambda >= 8)) throw std::invalid_argument("auxiliary profile needs lambda >= 8");
    if (support_radius() > 0.25 * L) throw std::invalid_argument("auxiliary profile wider than a quarter torus");
    if (table < 64) throw std::invalid_argument("auxiliary table too small");
    strand_ = L / d.v.cast<double>().norm();
    table_.resize(table);
    slope_.resize(table);
    const double R = support_radius(), len = dir_.v.cast<double>().norm() * L;
    for (int m = 0; m < table; ++m) {
        const double w = strand_ * m / table;
        table_[m] = line_profile_exact(w);
        const long lo = static_cast<long>(std::floor((-R - w) / strand_)), hi = static_cast<long>(std::ceil((R - w) / strand_));
        double acc = 0;
        for (long j = lo; j <= hi; ++j) acc += lambda_ * lambda_ * auxiliary_chord_derivative(lambda_ * (w + j * strand_));
        slope_[m] = acc / len;
    }
    min_bar_ = *std::min_element(table_.begin(), table_.end());
    if (min_bar_ < 1e-6) throw std::runtime_error("line profile of the auxiliary block vanishes: strands too sparse");
}

double AuxiliaryProfile::omega(const Vec2& y) const { return lambda_ * lambda_ * omega0(lambda_ * y.norm()); }

// Each of the |v| strands of the closed line crosses the support at most once, contributing the
// chord integral lambda A(lambda w); the average divides by the line length |v| L.
double AuxiliaryProfile::line_profile_exact(double w) const {
    const double R = support_radius();
    const long lo = static_cast<long>(std::floor((-R - w) / strand_)), hi = static_cast<long>(std::ceil((R - w) / strand_));
    double acc = 0;
    for (long m = lo; m <= hi; ++m) acc += lambda_ * auxiliary_chord(lambda_ * (w + m * strand_));
    return acc / (dir_.v.cast<double>().norm() * L_);
}

double AuxiliaryProfile::line_profile(double w) const {
    const double u = w / strand_ * static_cast<double>(table_.size());
    return periodic_cubic(table_, u);
}

double AuxiliaryProfile::value(const Vec2& y) const {
    const Vec2 m = minimal_image(y, L_);
    if (m.norm() >= support_radius()) return 0.0;
    return omega(m) / line_profile(normal_.dot(m));
}

Vec2 AuxiliaryProfile::gradient(const Vec2& y) const {
    const Vec2 m = minimal_image(y, L_);
    const double rho = m.norm();
    if (rho >= support_radius() || rho == 0.0) return Vec2::Zero();
    const double u = normal_.dot(m) / strand_ * static_cast<double>(table_.size());
    const double bar = periodic_cubic(table_, u), dbar = periodic_cubic(slope_, u);
    const Vec2 grad_omega = (lambda_ * lambda_ * lambda_ * omega0_derivative(lambda_ * rho) / rho) * m;
    return grad_omega / bar - (omega(m) * dbar / (bar * bar)) * normal_;
}

AuxiliaryProfile::Patch AuxiliaryProfile::patch(const TorusGrid& g, const Vec2& center) const {
    Patch p;
    const double h = g.h(), R = support_radius();
    const Vec2 c = wrap_point(center, g.L);
    const int i0 = static_cast<int>(std::floor((c[0] - R) / h)), i1 = static_cast<int>(std::ceil((c[0] + R) / h));
    const int j0 = static_cast<int>(std::floor((c[1] - R) / h)), j1 = static_cast<int>(std::ceil((c[1] + R) / h));
    double sum = 0;
    for (int jj = j0; jj <= j1; ++jj)
        for (int ii = i0; ii <= i1; ++ii) {
            const Vec2 y(ii * h - c[0], jj * h - c[1]);
            const double rho = y.norm();
            if (rho >= R) continue;
            const double v = omega(y) / line_profile(normal_.dot(y));
            const int i = ((ii % g.N) + g.N) % g.N, j = ((jj % g.N) + g.N) % g.N;
            p.idx.emplace_back(i, j);
            p.val.push_back(v);
            sum += v;
        }
    p.mean = sum / (double(g.N) * double(g.N));
    return p;
}

ScalarField AuxiliaryProfile::sample(const TorusGrid& g, const Vec2& center, bool unit_mean) const {
    const Patch p = patch(g, center);
    ScalarField f(g);
    const double s = unit_mean ? 1.0 / p.mean : 1.0;
    for (std::size_t k = 0; k < p.idx.size(); ++k) f[0](p.idx[k].first, p.idx[k].second) = s * p.val[k];
    return f;
}

double AuxiliaryProfile::line_average(const Vec2& x, const Vec2& x0) const {
    const double length = dir_.period;
    const int panels = static_cast<int>(std::ceil(length * lambda_ * 4));
    return composite_gauss([&](double s) { return value(x - x0 - s * dir_.xi); }, 0.0, length, panels) / length;
}

// ------------------------------------------------------------------ cells

Cell build_cell(const ScalarField& a_k, const DirectionSet& dirs, const TimePartition& p, int k, int i,
                double scale, bool normalized, TrajectoryOptions opt) {
    if (!(scale > 0)) throw std::invalid_argument("cell scale must be positive");
    Cell c;
    c.k = k;
    c.i = i;
    c.dir = dirs.dirs.at(i - 1);
    c.a = a_k;
    c.scale = scale;
    c.normalized = normalized;
    c.start = select_amplitude_and_start(a_k, c.dir, p, k, i, normalized);
    c.period = period_bookkeeping(c.dir, p.lambda, scale, c.start.eta, p);
    std::tie(c.begin, c.end) = p.quarter(k, i);
    c.ramp = p.ramp();

    ScalarField r = a_k;
    r *= scale;
    auto line = std::make_shared<LineSeries>(r, c.dir, c.start.x0);
    const double amp = c.start.eta * (normalized ? 1.0 / two_pi : 1.0);
    TimeProfile prof;
    prof.value = [p, k, i, amp](double t) { return amp * p.cutoff(k, i, t); };
    prof.rate = [p, k, i, amp](double t) { return amp * p.cutoff_rate(k, i, t); };
    prof.begin = c.begin;
    prof.end = c.end;
    opt.anchor = c.start.anchor;
    c.traj = std::make_shared<Trajectory>(line, prof, c.dir, c.start.x0, c.begin, c.end, a_k.grid.L, opt);
    c.profile = std::make_shared<AuxiliaryProfile>(c.dir, p.lambda, a_k.grid.L);
    return c;
}

double cell_rate(const Cell& c, double t) {
    if (t <= c.begin || t >= c.end) return 0.0;
    return source_rate(c.traj->state(t), c.normalized);
}

VectorField sample_U(const Cell& c, const TorusGrid& g, double t, bool unit_mean) {
    VectorField U(g);
    if (t <= c.begin || t >= c.end) return U;
    const BlockState st = c.traj->state(t);
    const double rate = source_rate(st, c.normalized);
    if (rate == 0.0) return U;
    const ScalarField prof = c.profile->sample(g, st.center, unit_mean);
    U[0] = (rate * c.dir.xi[0]) * prof[0];
    U[1] = (rate * c.dir.xi[1]) * prof[0];
    return U;
}

// ------------------------------------------------------------------ time integrals

CellIntegrals integrate_cell(const Cell& c, const TorusGrid& g, std::vector<double> queries, QuadratureOptions opt) {
    std::sort(queries.begin(), queries.end());
    CellIntegrals out;
    out.queries = queries;
    out.total = ScalarField(g);
    out.flux = ScalarField(g);
    const double kappa = c.normalized ? two_pi : 1.0;
    const double h = g.h();

    std::vector<double> cuts{c.begin};
    for (double q : queries)
        if (q > c.begin && q < c.end && q > cuts.back()) cuts.push_back(q);
    cuts.push_back(c.end);

    Vec2 last = c.traj->state(c.begin).center;
    auto add_node = [&](double t, double w) {
        const BlockState st = c.traj->state(t);
        out.max_shift = std::max(out.max_shift, minimal_image(st.center - last, g.L).norm() / h);
        last = st.center;
        ++out.nodes;
        if (st.e == 0.0) return;
        const AuxiliaryProfile::Patch p = c.profile->patch(g, st.center);
        const double s = opt.unit_mean ? 1.0 / p.mean : 1.0;
        const double wr = w * s * source_rate(st, c.normalized), wf = w * s * kappa * st.e * st.e;
        for (std::size_t m = 0; m < p.idx.size(); ++m) {
            const auto [i, j] = p.idx[m];
            out.total[0](i, j) += wr * p.val[m];
            out.flux[0](i, j) += wf * p.val[m];
        }
    };

    std::vector<std::pair<double, ScalarField>> marks;  // running integral at each cut
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double a = cuts[piece], b = cuts[piece + 1];
        // Simpson panels by bisection: the center moves at most 2 shift cells per panel (the speed
        // follows the scale along the line) and the ramps get nodes_per_ramp nodes
        // and the rate itself is integrated to a relative accuracy rate_tol
        const double max_len = 2.0 * c.ramp / opt.nodes_per_ramp;
        auto rate = [&](double t) { return source_rate(c.traj->state(t), c.normalized); };
        double rate_max = 0;
        for (int m = 0; m <= 1000; ++m) rate_max = std::max(rate_max, std::abs(rate(a + (b - a) * m / 1000)));
        std::vector<std::pair<double, double>> stack{{a, b}}, panels;
        while (!stack.empty()) {
            const auto [x, y] = stack.back();
            stack.pop_back();
            const double ds = std::abs(c.traj->state(y).s - c.traj->state(x).s);
            bool ok = ds <= 2.0 * opt.shift * h && y - x <= max_len;
            if (ok) {
                const double l = y - x, f0 = rate(x), f1 = rate(x + l / 4), f2 = rate(x + l / 2), f3 = rate(x + 3 * l / 4),
                             f4 = rate(y);
                const double one = l / 6 * (f0 + 4 * f2 + f4), two = l / 12 * (f0 + 4 * f1 + 2 * f2 + 4 * f3 + f4);
                ok = std::abs(one - two) <= opt.rate_tol * rate_max * l;
            }
            if (ok || y - x < 1e-14 * (b - a + 1.0)) {
                panels.emplace_back(x, y);
            } else {
                const double mid = 0.5 * (x + y);
                stack.emplace_back(mid, y);
                stack.emplace_back(x, mid);
            }
        }
        // panels come out in order; merge the shared end points
        std::vector<std::pair<double, double>> nodes{{a, 0.0}};
        for (const auto& [x, y] : panels) {
            const double w = (y - x) / 6.0;
            nodes.back().second += w;
            nodes.emplace_back(0.5 * (x + y), 4.0 * w);
            nodes.emplace_back(y, w);
        }
        for (const auto& [t, w] : nodes) add_node(t, w);
        marks.emplace_back(b, out.total);
    }
    for (double q : queries) {
        if (q <= c.begin) {
            out.partial.emplace_back(g);
            continue;
        }
        const auto it = std::find_if(marks.begin(), marks.end(), [q](const auto& m) { return m.first >= q; });
        out.partial.push_back(it == marks.end() ? out.total : it->second);
    }
    return out;
}

std::pair<double, double> pointwise_time_identity(const Cell& c, const Vec2& x, int panels_per_support) {
    const double kappa = c.normalized ? two_pi : 1.0;
    const double dist = std::abs(c.traj->state(c.end).s - c.traj->state(c.begin).s);
    const int panels = std::max(64, static_cast<int>(std::ceil(dist / c.profile->support_radius() * panels_per_support)));
    const double lhs = composite_gauss(
        [&](double t) {
            const BlockState st = c.traj->state(t);
            return source_rate(st, c.normalized) * c.profile->value(x - st.center);
        },
        c.begin, c.end, panels);
    const double rhs = composite_gauss(
        [&](double t) {
            const BlockState st = c.traj->state(t);
            return kappa * st.e * st.e * c.dir.xi.dot(c.profile->gradient(x - st.center));
        },
        c.begin, c.end, panels);
    return {lhs, rhs};
}

CancellationResult verify_cancellation(const Cell& c, const TorusGrid& g, double tau, QuadratureOptions opt) {
    const CellIntegrals ci = integrate_cell(c, g, {}, opt);
    CancellationResult res;
    res.nodes = ci.nodes;
    const Vec2 xi = c.dir.xi;
    res.PtauU = VectorField(g);
    res.PtauU[0] = (xi[0] / tau) * ci.total[0];
    res.PtauU[1] = (xi[1] / tau) * ci.total[0];
    const VectorField target = tensor_divergence(rank_one(c.a, xi));
    const VectorField defect = res.PtauU - target;
    const double scale = std::max(max_abs(res.PtauU), 1e-300);
    const auto m = mean(res.PtauU);
    res.mean_defect = std::hypot(m[0], m[1]) / scale;
    res.G = symmetric_antidiv_projected(defect);
    ScalarField coeff = ci.flux;
    coeff *= 1.0 / tau;
    coeff -= c.a;
    res.G_piecewise = rank_one(coeff, xi);
    res.route_gap = max_abs(tensor_divergence(res.G_piecewise) - defect) / scale;
    res.G_L1 = lp_norm(res.G, 1.0);
    res.a_C1 = max_abs(c.a) + pointwise_magnitude(gradient(c.a)).maxCoeff();
    res.ratio = res.G_L1 / (res.a_C1 / c.profile->lambda());
    return res;
}

CorrectorSamples build_time_corrector(const std::array<const Cell*, 4>& cells, const TorusGrid& g, double tau,
                                      std::vector<double> queries, QuadratureOptions opt) {
    std::sort(queries.begin(), queries.end());
    const int k = cells[0]->k;
    const double t0 = k * tau, t1 = (k + 1) * tau;
    for (double q : queries)
        if (q < t0 - 1e-12 * tau || q > t1 + 1e-12 * tau)
            throw std::invalid_argument("corrector query outside its interval");
    CorrectorSamples out;
    out.times = queries;
    out.PtauU = VectorField(g);
    std::array<CellIntegrals, 4> ints;
    for (int i = 0; i < 4; ++i) {
        if (cells[i]->k != k || cells[i]->i != i + 1) throw std::invalid_argument("corrector cells out of order");
        ints[i] = integrate_cell(*cells[i], g, queries, opt);
        const Vec2 xi = cells[i]->dir.xi;
        out.PtauU_cell[i] = VectorField(g);
        out.PtauU_cell[i][0] = (xi[0] / tau) * ints[i].total[0];
        out.PtauU_cell[i][1] = (xi[1] / tau) * ints[i].total[0];
        out.PtauU += out.PtauU_cell[i];
    }
    for (std::size_t n = 0; n < queries.size(); ++n) {
        VectorField acc(g);
        for (int i = 0; i < 4; ++i) {
            const Vec2 xi = cells[i]->dir.xi;
            acc[0] += xi[0] * ints[i].partial[n][0];
            acc[1] += xi[1] * ints[i].partial[n][0];
        }
        acc -= (std::min(queries[n], t1) - t0) * out.PtauU;
        out.Q.push_back(-leray_project(acc));
    }
    return out;
}

}  // namespace eulerci
