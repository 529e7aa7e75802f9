// The auxiliary profile that replaces the block source, its time integral over an interval,
// the stress it leaves behind after time averaging, and the time corrector.
#pragma once

#include "eulerci/stress_decomposition.hpp"

#include <memory>
#include <vector>

namespace eulerci {

// U(y) = Omega(y) / Omega_bar(n . y) with Omega = lambda^2 Omega0(lambda y),
// Omega0(rho) = bump(rho/2)/bump(1/2) (support radius 2, at least 1 on the unit disc), and
// Omega_bar the average of Omega over the closed lines parallel to xi. Every such line
// average of U equals one and so does its torus average.
class AuxiliaryProfile {
public:
    AuxiliaryProfile(const Direction& d, double lambda, double L = 1.0, int table = 8192);

    double omega(const Vec2& y) const;        // rescaled bump, y a minimal-image displacement
    double line_profile(double w) const;      // Omega_bar at transverse coordinate w = n . y
    double line_profile_exact(double w) const;  // the same by direct summation (slow)
    double value(const Vec2& y) const;        // any displacement; wrapped internally
    Vec2 gradient(const Vec2& y) const;
    double support_radius() const { return 2.0 / lambda_; }
    double min_line_profile() const { return min_bar_; }
    double lambda() const { return lambda_; }
    const Direction& direction() const { return dir_; }

    // Grid samples of U(x - center) inside the support.
    struct Patch {
        std::vector<std::pair<int, int>> idx;
        std::vector<double> val;
        double mean = 0;  // grid mean of the samples over the whole torus
    };
    Patch patch(const TorusGrid& g, const Vec2& center) const;
    ScalarField sample(const TorusGrid& g, const Vec2& center, bool unit_mean = false) const;
    // Average of U(x - x0 - s xi) over one closed line, by composite Gauss quadrature.
    double line_average(const Vec2& x, const Vec2& x0) const;

private:
    Direction dir_;
    Vec2 normal_;
    double lambda_, L_, strand_;
    std::vector<double> table_, slope_;  // Omega_bar and its derivative on one strand spacing
    double min_bar_ = 0;
};

// Transverse integral of Omega0 at distance w from the center: int Omega0(sqrt(w^2 + t^2)) dt.
double auxiliary_chord(double w);
double auxiliary_chord_derivative(double w);

// One (i, k) cell: coefficient, start point, trajectory and auxiliary profile.
struct Cell {
    int k = 0, i = 1;
    Direction dir;
    ScalarField a;        // time-averaged coefficient a_i^k
    double scale = 0;     // r_{q+1}; the block size is scale * a along the trajectory
    bool normalized = true;
    StartSelection start;
    PeriodInfo period;
    double begin = 0, end = 0;  // the quarter interval
    double ramp = 0;            // cutoff ramp width
    std::shared_ptr<const Trajectory> traj;
    std::shared_ptr<const AuxiliaryProfile> profile;
};

Cell build_cell(const ScalarField& a_k, const DirectionSet& dirs, const TimePartition& p, int k, int i,
                double scale, bool normalized = true, TrajectoryOptions opt = {});

// d/dt(eta zeta r) at time t.
double cell_rate(const Cell& c, double t);
// U(x, t) = d/dt(eta zeta r) U(x - x(t)) xi; with unit_mean the profile is divided by its grid
// mean so that the source it replaces is matched exactly in mean.
VectorField sample_U(const Cell& c, const TorusGrid& g, double t, bool unit_mean = true);

struct QuadratureOptions {
    double shift = 0.5;        // largest center displacement between nodes, in grid cells
    int nodes_per_ramp = 64;   // lower bound from the time variation of the cutoff
    double rate_tol = 1e-7;    // per-panel error of the rate integral, relative to max|rate| times the panel length
    bool unit_mean = true;
};

// Composite Simpson integrals of U over [begin, t] for each query time (sorted), together with
// the integral over the whole quarter and of kappa e^2 U(x - x(t)) (the flux whose xi-derivative
// is the time integral of U).
struct CellIntegrals {
    std::vector<double> queries;
    std::vector<ScalarField> partial;  // int_begin^t rate * U dt (scalar; times xi gives the vector)
    ScalarField total, flux;
    long nodes = 0;
    double max_shift = 0;              // largest node-to-node displacement, in grid cells
};
CellIntegrals integrate_cell(const Cell& c, const TorusGrid& g, std::vector<double> queries = {},
                             QuadratureOptions opt = {});

// Integration by parts in time at one point, by composite Gauss quadrature on the continuous
// profile: returns int rate U(x - x(t)) dt and xi . grad_x int kappa e^2 U(x - x(t)) dt, which agree.
std::pair<double, double> pointwise_time_identity(const Cell& c, const Vec2& x, int panels_per_support = 8);

struct CancellationResult {
    VectorField PtauU;               // (1/tau) int U over the interval
    SymTensorField G;                // R0(PtauU - div(a xi xi))
    SymTensorField G_piecewise;      // (flux/tau - a) xi xi
    double G_L1 = 0;
    double a_C1 = 0;                 // max|a| + max|grad a|
    double ratio = 0;                // G_L1 / (a_C1 / lambda)
    double route_gap = 0;            // max|div G_piecewise - (PtauU - div(a xi xi))| / max|PtauU|
    double mean_defect = 0;          // |mean PtauU| / max|PtauU|
    long nodes = 0;
};
CancellationResult verify_cancellation(const Cell& c, const TorusGrid& g, double tau, QuadratureOptions opt = {});

// Q(t) = -P int_{k tau}^t (U - P_tau U) ds over one interval, for the four cells of that
// interval (cells[i-1] active in quarter i). Returns Q at the query times (sorted, inside the
// interval) and the time average P_tau U.
struct CorrectorSamples {
    std::vector<double> times;
    std::vector<VectorField> Q;
    VectorField PtauU;
    std::array<VectorField, 4> PtauU_cell;
};
CorrectorSamples build_time_corrector(const std::array<const Cell*, 4>& cells, const TorusGrid& g, double tau,
                                      std::vector<double> queries, QuadratureOptions opt = {});

}  // namespace eulerci
