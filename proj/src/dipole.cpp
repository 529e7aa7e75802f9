#include "eulerci/dipole.hpp"

#include "eulerci/bessel.hpp"
#include "eulerci/mollify.hpp"

#include <complex>
#include <memory>
#include <stdexcept>

namespace eulerci {

namespace {

// Radial profile g of Psi = x2 g(rho), with G1 = g'/rho and G2 = G1'/rho.
struct Profile {
    double g, G1, G2;
};

Profile core_profile(double rho) {
    static const double b = bessel_j1_first_zero();
    static const double j0b = bessel_j(0, b);
    const double z = b * rho;
    return {1.0 - (2.0 / j0b) * bessel_j_over_power(1, z),
            (2.0 * b * b / j0b) * bessel_j_over_power(2, z),
            -(2.0 * b * b * b * b / j0b) * bessel_j_over_power(3, z)};
}

Profile far_profile(double rho) {
    const double q = 1.0 / (rho * rho);
    return {q, -2.0 * q * q, 8.0 * q * q * q};
}

// Blend of the two profiles on |rho - 1| < eps; w is the weight of the core term in the pressure
// and dw its radial derivative.
Profile blended_profile(double rho, double eps, double& w, double& dw) {
    dw = 0;
    if (eps <= 0.0) {
        w = rho < 1.0 ? 1.0 : 0.0;
        return rho < 1.0 ? core_profile(rho) : far_profile(rho);
    }
    if (rho <= 1.0 - eps) {
        w = 1;
        return core_profile(rho);
    }
    if (rho >= 1.0 + eps) {
        w = 0;
        return far_profile(rho);
    }
    const Profile a = core_profile(rho), c = far_profile(rho);
    const StepJet s = smooth_step((rho - 1.0 + eps) / (2.0 * eps));
    const double b0 = s.v, b1 = s.d1 / (2 * eps), b2 = s.d2 / (4 * eps * eps);
    // radial derivatives g' = rho G1, g'' = G1 + rho^2 G2
    const double a1 = rho * a.G1, a2 = a.G1 + rho * rho * a.G2;
    const double c1 = rho * c.G1, c2 = c.G1 + rho * rho * c.G2;
    const double d0 = c.g - a.g, d1 = c1 - a1, d2 = c2 - a2;
    const double g = a.g + b0 * d0;
    const double g1 = a1 + b1 * d0 + b0 * d1;
    const double g2 = a2 + b2 * d0 + 2 * b1 * d1 + b0 * d2;
    w = 1.0 - b0;
    dw = -b1;
    const double G1 = g1 / rho;
    return {g, G1, (g2 - G1) / (rho * rho)};
}

void check_point(const Vec2& x) {
    if (x.norm() < 1e-12) throw std::domain_error("doublet is singular at the origin");
}

}  // namespace

double dipole_b() {
    static const double b = bessel_j1_first_zero();
    return b;
}

DoubletSample doublet(const Vec2& x) {
    check_point(x);
    const double q = x.squaredNorm();
    const std::complex<double> z(x(0), x(1));
    const std::complex<double> v = 1.0 / (z * z);  // V1 - i V2
    DoubletSample s;
    s.velocity = Vec2(v.real(), -v.imag());
    s.potential = -x(0) / q;
    s.stream = x(1) / q;
    s.pressure = s.velocity(0) - 0.5 * s.velocity.squaredNorm();
    return s;
}

Mat2 doublet_velocity_gradient(const Vec2& x) {
    check_point(x);
    const std::complex<double> z(x(0), x(1));
    const std::complex<double> a = -2.0 / (z * z * z);  // d1 (V1 - i V2)
    Mat2 m;
    m << a.real(), -a.imag(), -a.imag(), -a.real();
    return m;
}

FlowJet unit_dipole(const Vec2& x, double blend) {
    const double rho = x.norm();
    double w, dw;
    const Profile pr = blended_profile(rho, blend, w, dw);
    const double x2 = x(1);
    const Vec2 e2(0, 1);
    const Vec2 grad_psi = pr.g * e2 + x2 * pr.G1 * x;
    Mat2 H = pr.G1 * (e2 * x.transpose() + x * e2.transpose() + x2 * Mat2::Identity()) +
             x2 * pr.G2 * x * x.transpose();
    FlowJet j;
    j.stream = x2 * pr.g;
    j.v = Vec2(grad_psi(1), -grad_psi(0));
    j.dv.row(0) = H.row(1);
    j.dv.row(1) = -H.row(0);
    const double b2 = dipole_b() * dipole_b();
    const double core = j.stream - x2;  // Psi - x2
    const Vec2 grad_core = grad_psi - e2;
    j.pressure = j.v(0) - 0.5 * j.v.squaredNorm() - w * 0.5 * b2 * core * core;
    j.grad_pressure = j.dv.row(0).transpose() - j.dv.transpose() * j.v - w * b2 * core * grad_core;
    if (dw != 0.0) j.grad_pressure -= dw * 0.5 * b2 * core * core * (x / rho);
    return j;
}

double dipole_stream(double rho, double theta) {
    double w, dw;
    return rho * std::sin(theta) * blended_profile(rho, 0.0, w, dw).g;
}

void DipoleParams::validate(double half_cell) const {
    if (!(r > 0 && r < 1.0 / 9.0)) throw std::invalid_argument("dipole scale r must lie in (0, 1/9)");
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("cutoff exponent alpha must lie in (0, 1)");
    if (!(smoothing >= 0 && smoothing < 0.5)) throw std::invalid_argument("smoothing ratio must lie in [0, 1/2)");
    if (!(support_radius() < half_cell)) throw std::invalid_argument("block support 2 r^alpha exceeds the half cell");
}

DipoleBlock::DipoleBlock(const DipoleParams& p) : p_(p) { p_.validate(); }

FlowJet DipoleBlock::scaled_dipole(const Vec2& x) const {
    const double r = p_.r;
    FlowJet j = unit_dipole(x / r, p_.smoothing);
    j.v /= r;
    j.dv /= r * r;
    j.pressure /= r * r;
    j.grad_pressure /= r * r * r;
    return j;
}

namespace {

struct CutoffJets {
    bool active = false;
    double c = 0, cr = 0, phi = 0;  // chi, d/dr chi, Phi~
    Vec2 grad_c, grad_cr, v;         // v = grad Phi~
    Mat2 hess_c, dv;
};

CutoffJets cutoff_jets(const DipoleParams& p, const Vec2& x) {
    CutoffJets j;
    const double rho = x.norm(), R = p.cutoff_radius();
    if (rho <= R) return j;
    j.active = true;
    const double s = rho / R;
    const StepJet ch = smooth_step(s - 1.0);
    const Vec2 n = x / rho;
    const double c1 = ch.d1 / R, c2 = ch.d2 / (R * R);
    j.c = ch.v;
    j.grad_c = c1 * n;
    j.hess_c = c2 * n * n.transpose() + (c1 / rho) * (Mat2::Identity() - n * n.transpose());
    j.cr = -p.alpha * ch.d1 * s / p.r;
    j.grad_cr = -(p.alpha / p.r) * (ch.d2 * s + ch.d1) / R * n;
    const DoubletSample d = doublet(x);
    j.phi = d.potential;
    j.v = d.velocity;
    j.dv = doublet_velocity_gradient(x);
    return j;
}

}  // namespace

PotentialJet DipoleBlock::Pi(const Vec2& x) const {
    PotentialJet out;
    const CutoffJets j = cutoff_jets(p_, x);
    if (!j.active) return out;
    const double r = p_.r;
    out.value = r * j.c * j.phi;
    out.grad = r * (j.phi * j.grad_c + j.c * j.v);
    out.hess = r * (j.phi * j.hess_c + j.grad_c * j.v.transpose() + j.v * j.grad_c.transpose() + j.c * j.dv);
    return out;
}

PotentialJet DipoleBlock::dPi_dr(const Vec2& x) const {
    PotentialJet out;
    const CutoffJets j = cutoff_jets(p_, x);
    if (!j.active) return out;
    const double r = p_.r;
    out.value = j.c * j.phi + r * j.cr * j.phi;
    out.grad = j.phi * j.grad_c + j.c * j.v + r * (j.phi * j.grad_cr + j.cr * j.v);
    return out;
}

BlockSample DipoleBlock::sample(const Vec2& x) const {
    BlockSample s;
    if (x.norm() >= p_.support_radius()) return s;
    const double r = p_.r;
    const FlowJet v = scaled_dipole(x);
    const CutoffJets j = cutoff_jets(p_, x);
    Vec2 gPi = Vec2::Zero(), gdPi = Vec2::Zero();
    Mat2 hPi = Mat2::Zero();
    if (j.active) {
        gPi = r * (j.phi * j.grad_c + j.c * j.v);
        hPi = r * (j.phi * j.hess_c + j.grad_c * j.v.transpose() + j.v * j.grad_c.transpose() + j.c * j.dv);
        gdPi = j.phi * j.grad_c + j.c * j.v + r * (j.phi * j.grad_cr + j.cr * j.v);
        s.P2 = -r * j.phi * j.cr;
        s.grad_P2 = -r * (j.phi * j.grad_cr + j.cr * j.v);
    }
    s.W = v.v - gPi;
    s.dW = v.dv - hPi;
    s.dW_dr = -v.v / r - v.dv * x / r - gdPi;
    s.P1 = v.pressure - gPi(0) / r + 0.5 * gPi.squaredNorm();
    s.grad_P1 = v.grad_pressure - hPi.col(0) / r + hPi * gPi;
    s.grad_Pi = gPi;
    s.hess_Pi = hPi;
    return s;
}

Mat2 DipoleBlock::F1_local(const Vec2& x) const {
    const BlockSample s = sample(x);
    return -(s.W * s.grad_Pi.transpose() + s.grad_Pi * s.W.transpose());
}

Vec2 DipoleBlock::F1_source(const Vec2& x) const {
    const PotentialJet pi = Pi(x);
    return -pi.hess.trace() * pi.grad;
}

Vec2 DipoleBlock::F2_source(const Vec2& x) const {
    const double edge = p_.r * (1.0 + p_.smoothing);
    if (x.norm() >= edge) return Vec2::Zero();
    const FlowJet v = scaled_dipole(x);
    return -(v.dv * x + 2.0 * v.v) / p_.r;
}

BogovskiiBall DipoleBlock::F1_ball() const {
    BogovskiiBall b;
    b.radius = p_.support_radius();
    b.kink_radii = {p_.cutoff_radius()};
    b.ray_nodes = 32;
    return b;
}

BogovskiiBall DipoleBlock::F2_ball() const {
    BogovskiiBall b;
    b.radius = p_.r * (1.0 + p_.smoothing);
    b.kink_radii = {p_.r};
    b.ray_nodes = 32;
    return b;
}

Mat2 DipoleBlock::F1(const Vec2& x) const {
    if (x.norm() >= p_.support_radius()) return Mat2::Zero();
    return F1_local(x) + bogovskii_apply<2>([this](const Vec2& y) { return F1_source(y); }, F1_ball(), x);
}

Mat2 DipoleBlock::F2(const Vec2& x) const {
    return bogovskii_apply<2>([this](const Vec2& y) { return F2_source(y); }, F2_ball(), x);
}

Vec2 constant_speed_lhs(const DipoleBlock& block, const Vec2& x) {
    const BlockSample s = block.sample(x);
    return -s.dW.col(0) / block.params().r + s.dW * s.W + s.W * s.dW.trace() + s.grad_P1;
}

Vec2 div_F1(const DipoleBlock& block, const Vec2& x) {
    const BlockSample s = block.sample(x);
    const double lap = s.hess_Pi.trace();
    const Vec2 local = -(s.dW * s.grad_Pi + s.W * lap + s.hess_Pi * s.W + s.grad_Pi * s.dW.trace());
    return local - lap * s.grad_Pi;
}

Vec2 scale_lhs(const DipoleBlock& block, const Vec2& x) {
    const BlockSample s = block.sample(x);
    return s.dW_dr - s.W / block.params().r - s.grad_P2;
}

// ------------------------------------------------------------------ CompactField views

namespace {

Eigen::VectorXd flat(const Mat2& m) {
    Eigen::VectorXd v(4);
    v << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return v;
}

Eigen::VectorXd one(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

Decomposition decompose(const DipoleParams& p) {
    auto block = std::make_shared<DipoleBlock>(p);
    Decomposition d;
    d.W = {[block](const Vec2& x) { return Eigen::VectorXd(block->W(x)); }, p.support_radius(), p.smoothing > 0};
    d.Pi = {[block, p](const Vec2& x) { return x.norm() >= p.support_radius() ? one(0) : one(block->Pi(x).value); },
            p.support_radius(), true};
    return d;
}

ConstantSpeedFields constant_speed_block(const DipoleParams& p) {
    auto block = std::make_shared<DipoleBlock>(p);
    const double R = p.support_radius();
    ConstantSpeedFields f;
    f.P1 = {[block](const Vec2& x) { return one(block->sample(x).P1); }, R, p.smoothing > 0};
    f.P2 = {[block](const Vec2& x) { return one(block->sample(x).P2); }, R, true};
    f.F1 = {[block](const Vec2& x) { return flat(block->F1(x)); }, R, p.smoothing > 0};
    f.F2 = {[block](const Vec2& x) { return flat(block->F2(x)); }, p.r * (1 + p.smoothing), p.smoothing > 0};
    return f;
}

// ------------------------------------------------------------------ convolution smoothing

SmoothedBlock::SmoothedBlock(const DipoleBlock& block, double ell, int radial_nodes, int angles)
    : block_(block), ell_(ell) {
    if (!(ell > 0)) throw std::invalid_argument("smoothing radius must be positive");
    const auto& gl = detail::gauss_legendre_rule(radial_nodes);
    double mass = 0;
    for (const auto& [t, wt] : gl) {
        const double s = 0.5 * (t + 1.0);
        for (int m = 0; m < angles; ++m) {
            const double th = 2.0 * std::numbers::pi * (m + 0.5) / angles;
            const double w = 0.5 * wt * s * bump_kernel_2d(s) * 2.0 * std::numbers::pi / angles;
            nodes_.emplace_back(ell * s * Vec2(std::cos(th), std::sin(th)), w);
            mass += w;
        }
    }
    for (auto& n : nodes_) n.second /= mass;
}

template <class F>
auto SmoothedBlock::convolve(const Vec2& x, F&& f) const {
    using T = std::decay_t<decltype(f(x))>;
    T acc = T::Zero();
    for (const auto& [y, w] : nodes_) acc += w * f(Vec2(x - y));
    return acc;
}

Vec2 SmoothedBlock::W(const Vec2& x) const {
    return convolve(x, [this](const Vec2& y) { return Vec2(block_.sample(y).W); });
}

Mat2 SmoothedBlock::dW(const Vec2& x) const {
    return convolve(x, [this](const Vec2& y) { return Mat2(block_.sample(y).dW); });
}

Vec2 SmoothedBlock::grad_P1(const Vec2& x) const {
    return convolve(x, [this](const Vec2& y) { return Vec2(block_.sample(y).grad_P1); });
}

Mat2 SmoothedBlock::F1(const Vec2& x) const {
    const Mat2 avg = convolve(x, [this](const Vec2& y) {
        const Vec2 w = block_.sample(y).W;
        return Mat2(block_.F1(y) - w * w.transpose());
    });
    const Vec2 wl = W(x);
    return avg + wl * wl.transpose();
}

Vec2 SmoothedBlock::div_F1(const Vec2& x) const {
    const Vec2 avg = convolve(x, [this](const Vec2& y) {
        const BlockSample s = block_.sample(y);
        return Vec2(eulerci::div_F1(block_, y) - (s.dW * s.W + s.W * s.dW.trace()));
    });
    const Vec2 wl = W(x);
    const Mat2 dwl = dW(x);
    return avg + dwl * wl + wl * dwl.trace();
}

Vec2 SmoothedBlock::residual(const Vec2& x) const {
    const Vec2 wl = W(x);
    const Mat2 dwl = dW(x);
    return -dwl.col(0) / block_.params().r + dwl * wl + wl * dwl.trace() + grad_P1(x) - div_F1(x);
}

}  // namespace eulerci
