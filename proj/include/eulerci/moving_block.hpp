// Variable-speed, variable-size building block on the torus: the trajectory of its center,
// the principal part, the divergence corrector, source, pressure and error tensor.
#pragma once

#include "eulerci/dipole.hpp"
#include "eulerci/torus.hpp"

#include <functional>
#include <map>
#include <memory>

namespace eulerci {

// Unit direction along a closed line of the torus: xi = v/|v| with v a primitive integer vector.
struct Direction {
    Vec2 xi;
    Eigen::Vector2i v;
    double period = 0;  // length of the closed line, |v| L
    double c = 0;       // period / (lambda L) when built from a slope parameter lambda
};
Direction make_direction(const Eigen::Vector2i& v, double L = 1.0, double lambda = 0.0);

// Wrap into [0, L)^2 and minimal-image displacement.
Vec2 wrap_point(const Vec2& x, double L);
Vec2 minimal_image(const Vec2& d, double L);

// Restriction of a grid field's trigonometric interpolant to the line x0 + s xi, as a 1-D
// Fourier series with period |v| L.
class LineSeries {
public:
    LineSeries(const ScalarField& f, const Direction& d, const Vec2& x0, double drop_tol = 1e-15);
    double value(double s) const;
    double derivative(double s) const;
    double line_average() const { return mean_; }
    double period() const { return period_; }
    std::size_t terms() const { return n_.size(); }

private:
    double period_, mean_;
    std::vector<double> n_;
    std::vector<std::complex<double>> c_;
};

// Average of f over the closed line through x0 (exact for the interpolant: the resonant modes).
double line_average(const ScalarField& f, const Direction& d, const Vec2& x0);

// Amplitude of the block in time: value and derivative, zero outside [begin, end].
struct TimeProfile {
    std::function<double(double)> value, rate;
    double begin = -INFINITY, end = INFINITY;
};
TimeProfile constant_profile(double c);

// Kinematic state of the block center at one time.
struct BlockState {
    double t = 0, s = 0;  // time and arclength along the line
    Vec2 center = Vec2::Zero();
    double r = 0, r_rate = 0;  // scale r(x(t)) and its time derivative
    double e = 0, e_rate = 0;  // velocity amplitude and its derivative
};

// d/dt(eta r) with eta = 2 pi e for normalized blocks and eta = e otherwise.
inline double source_rate(const BlockState& st, bool normalized) {
    const double kappa = normalized ? 2.0 * std::numbers::pi : 1.0;
    return kappa * (st.e_rate * st.r + st.e * st.r_rate);
}

struct TrajectoryOptions {
    double tol = 1e-12;  // relative and absolute tolerance of the adaptive integrator
    double max_step = 0;  // 0 = unlimited
    double anchor = NAN;  // time at which the center sits at x0 (default: the start time)
};

// x(t) = x0 + s(t) xi with s' = e(t) / r(x0 + s xi): the center speed is e/r along xi.
class Trajectory {
public:
    Trajectory(std::shared_ptr<const LineSeries> scale, TimeProfile amplitude, const Direction& d, const Vec2& x0,
               double t0, double t1, double L = 1.0, TrajectoryOptions opt = {});

    BlockState state(double t) const;
    // States at t + offsets, integrated locally from state(t) with a fine fixed-step rule so that
    // finite differences across them are consistent with the equation of motion.
    std::vector<BlockState> states_near(double t, const std::vector<double>& offsets) const;
    // Time at which the arclength `length` (measured from x0) is reached, by bisection.
    double time_to_travel(double length) const;

    double t0() const { return t_.front(); }
    double t1() const { return t_.back(); }
    double anchor() const { return anchor_; }
    const Direction& direction() const { return dir_; }
    const Vec2& start() const { return x0_; }
    std::size_t steps() const { return t_.size(); }
    // max |s'(t) - e/r| at interior dense points (checks the interpolant against the equation)
    double ode_residual(int samples = 1000) const;

private:
    double rhs(double t, double s) const;
    double rhs_dot(double t, double s) const;
    BlockState make_state(double t, double s) const;

    std::shared_ptr<const LineSeries> scale_;
    TimeProfile amp_;
    Direction dir_;
    Vec2 x0_;
    double L_, anchor_;
    std::vector<double> t_, s_;
};

struct BlockSetup {
    double alpha = 0.6;         // cutoff exponent: support radius 2 r^alpha
    double smoothing = 1.0 / 50;  // junction half-width relative to r
    bool normalized = true;     // amplitude eta/(2 pi) so that the source integrates to xi
};

// Everything of the block at one time except the time-differenced pressure part.
struct BlockFrame {
    BlockState state;
    VectorField Vp, Vc, V;
    VectorField S;          // source profile; the source term is S * source_rate
    double source_rate = 0;  // d/dt(eta r)
    VectorField dVp_dt;     // analytic time derivative of the principal part
    ScalarField P_local;    // e^2 P1 - e r' P2
    SymTensorField F;       // F3 + Vp (x) Vc + Vc (x) Vp + Vc (x) Vc
    SymTensorField F3;
    Vec2 mean_correction = Vec2::Zero();  // coefficient of the in-core mean correction
    Vec2 dropped_mean = Vec2::Zero();     // mean removed before the anti-divergence (roundoff)
};

class MovingBlock {
public:
    MovingBlock(const TorusGrid& g, std::shared_ptr<const Trajectory> traj, BlockSetup setup = {});

    // Principal part only (cheap; used for finite differences).
    VectorField principal(const BlockState& st) const;
    BlockFrame frame(const BlockState& st) const;
    BlockFrame frame(double t) const { return frame(traj_->state(t)); }
    // d/dt Lap^{-1} div V^p by fourth-order centered differences with step dt.
    ScalarField pressure_rate(double t, double dt) const;
    ScalarField pressure(const BlockFrame& f, double dt) const;
    // dV/dt + div(V x V) + grad P - S g - div F with dV/dt by fourth-order differences.
    VectorField residual(double t, double dt) const;

    // Radius of the sampled profile; grid fields reach one more cell (binomial filter).
    double support_radius(double r) const { return 2.0 * std::pow(r, setup_.alpha) + setup_.smoothing * r; }
    double grid_support_radius(double r) const { return support_radius(r) + std::sqrt(2.0) * grid_.h(); }
    double amplitude_factor() const;  // e = eta * amplitude_factor()
    const Trajectory& trajectory() const { return *traj_; }
    const TorusGrid& grid() const { return grid_; }
    const BlockSetup& setup() const { return setup_; }

private:
    struct Samples;
    Samples sample(const BlockState& st, bool full) const;

    TorusGrid grid_;
    std::shared_ptr<const Trajectory> traj_;
    BlockSetup setup_;
};

// Fourth-order centered first derivative from values at t-2h, t-h, t+h, t+2h.
template <class T>
T central_difference4(const T& m2, const T& m1, const T& p1, const T& p2, double h) {
    return (1.0 / (12.0 * h)) * (m2 - 8.0 * m1 + 8.0 * p1 - p2);
}

}  // namespace eulerci
