// Doublet flow, the Lamb-Chaplygin dipole and its compactly supported decomposition.
//
// Conventions: velocity gradients are matrices G(j,k) = d_k v_j. The dipole travels along +e1
// with unit speed in its own units; its velocity is (d2 Psi, -d1 Psi) for the stream Psi.
#pragma once

#include "eulerci/antidiv.hpp"
#include "eulerci/torus.hpp"

#include <functional>

namespace eulerci {

struct DoubletSample {
    Vec2 velocity;
    double potential;
    double stream;
    double pressure;
};

// Potential flow with complex potential -1/z. Rejects |x| < 1e-12.
DoubletSample doublet(const Vec2& x);
Mat2 doublet_velocity_gradient(const Vec2& x);

struct FlowJet {
    Vec2 v = Vec2::Zero();
    Mat2 dv = Mat2::Zero();  // dv(j,k) = d_k v_j
    double stream = 0;
    double pressure = 0;
    Vec2 grad_pressure = Vec2::Zero();
};

// Unit-radius dipole. blend > 0 replaces the C^{1,1} junction at |x| = 1 by a smooth transition
// of half-width `blend` between the core and potential profiles (identical outside the band).
FlowJet unit_dipole(const Vec2& x, double blend = 0.0);

double dipole_stream(double rho, double theta);

// Vorticity coefficient b^2 with b the first zero of J1.
double dipole_b();

struct DipoleParams {
    double r = 0.05;
    double alpha = 0.2;
    double smoothing = 0.0;  // junction half-width relative to r (ell / r)

    void validate(double half_cell = std::numeric_limits<double>::infinity()) const;
    double cutoff_radius() const { return std::pow(r, alpha); }
    double support_radius() const { return 2.0 * cutoff_radius(); }
};

// Everything the block needs at one point, evaluated from a single set of jets.
struct BlockSample {
    Vec2 W = Vec2::Zero();      // V_r - grad Pi_r
    Mat2 dW = Mat2::Zero();     // dW(j,k) = d_k W_j
    Vec2 dW_dr = Vec2::Zero();  // derivative with respect to the scale r at fixed x
    double P1 = 0;
    double P2 = 0;
    Vec2 grad_P1 = Vec2::Zero();
    Vec2 grad_P2 = Vec2::Zero();
    Vec2 grad_Pi = Vec2::Zero();
    Mat2 hess_Pi = Mat2::Zero();
};

struct PotentialJet {
    double value = 0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
};

class DipoleBlock {
public:
    explicit DipoleBlock(const DipoleParams& p);
    const DipoleParams& params() const { return p_; }

    FlowJet scaled_dipole(const Vec2& x) const;  // V_r = V(x/r)/r, P_r = P(x/r)/r^2
    PotentialJet Pi(const Vec2& x) const;        // r chi(|x|/r^alpha) Phi~(x)
    PotentialJet dPi_dr(const Vec2& x) const;    // d/dr of Pi at fixed x

    BlockSample sample(const Vec2& x) const;

    Vec2 W(const Vec2& x) const { return sample(x).W; }
    double div_W(const Vec2& x) const { return sample(x).dW.trace(); }

    // F1 = F1_local + B(F1_source), F2 = B(F2_source), B the Bogovskii operator on the given balls.
    Mat2 F1_local(const Vec2& x) const;
    Vec2 F1_source(const Vec2& x) const;
    Vec2 F2_source(const Vec2& x) const;
    BogovskiiBall F1_ball() const;
    BogovskiiBall F2_ball() const;
    Mat2 F1(const Vec2& x) const;
    Mat2 F2(const Vec2& x) const;

private:
    DipoleParams p_;
};

// Closed-form or sampled plane field with declared support radius (0 outside).
struct CompactField {
    std::function<Eigen::VectorXd(const Vec2&)> evaluate;
    double support_radius = 0;
    bool smooth = false;
};

struct Decomposition {
    CompactField W, Pi;
};
Decomposition decompose(const DipoleParams& p);

struct ConstantSpeedFields {
    CompactField P1, P2, F1, F2;  // tensors as (T11, T12, T21, T22)
};
ConstantSpeedFields constant_speed_block(const DipoleParams& p);

// Convolution of the block fields with the radial bump kernel of radius ell.
class SmoothedBlock {
public:
    SmoothedBlock(const DipoleBlock& block, double ell, int radial_nodes = 8, int angles = 16);

    Vec2 W(const Vec2& x) const;
    Mat2 dW(const Vec2& x) const;
    Vec2 grad_P1(const Vec2& x) const;
    // Smoothed error tensor F1*rho - (W x W)*rho + (W*rho) x (W*rho), which keeps the
    // constant-speed identity exact, and its divergence.
    Mat2 F1(const Vec2& x) const;
    Vec2 div_F1(const Vec2& x) const;
    // -(1/r) d1 W + div(W x W) + grad P1 - div F1 for the smoothed fields
    Vec2 residual(const Vec2& x) const;
    double support_radius() const { return block_.params().support_radius() + ell_; }

private:
    template <class F>
    auto convolve(const Vec2& x, F&& f) const;

    DipoleBlock block_;
    double ell_;
    std::vector<std::pair<Vec2, double>> nodes_;
};

// Pointwise pieces of the two constant-speed identities, from the analytic jets.
Vec2 constant_speed_lhs(const DipoleBlock& block, const Vec2& x);  // -(1/r) d1 W + div(W x W) + grad P1
Vec2 div_F1(const DipoleBlock& block, const Vec2& x);              // div F1 with div B(f) = f
Vec2 scale_lhs(const DipoleBlock& block, const Vec2& x);           // dW/dr - W/r - grad P2

}  // namespace eulerci
