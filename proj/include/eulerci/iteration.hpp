// One stage of the iteration: parameter schedule and its constraint system, stage-zero data,
// mollification, assembly of the new velocity, pressure and stress, and diagnostics.
#pragma once

#include "eulerci/cancellation.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <string>
#include <vector>

namespace eulerci {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class ScheduleMode { paper, toy };

struct ParameterSchedule {
    ScheduleMode mode = ScheduleMode::paper;
    long lambda0 = 2;
    Rational sigma{110}, beta{1, 245}, mu{53, 10}, kappa{3}, n{16};
    Rational alpha{1, 100000};
    Rational pbar = Rational(1) + Rational(1, 6500);

    static ParameterSchedule paper(long lambda0 = 2);
    // sigma = 2, mu = 6/5, kappa = 1, beta = 1/5: lambda_1 = lambda0^2 and tau_1 = 1/lambda_1.
    static ParameterSchedule toy(long lambda0 = 4);

    // lambda_q = lambda0^(sigma^q); needs an integer sigma.
    BigInt lambda(int q) const;
    double log10_lambda(int q) const;
    double log10_delta(int q) const;  // delta_q = lambda_1^(2 beta) lambda_q^(-beta)
    double log10_r(int q) const;      // r_q = lambda_q^(-mu)
    double log10_tau(int q) const;    // tau_q = lambda_q^(-kappa)
    // Floating values (toy mode; overflow to inf/0 is reported by the caller). tau is rounded so
    // that 1/tau is an integer.
    double delta(int q) const;
    double r(int q) const;
    double tau(int q) const;
};

struct Constraint {
    std::string text;
    Rational margin;  // positive margin means satisfied
    bool pass = false;
};
std::vector<Constraint> check_constraints(const ParameterSchedule& s);
bool all_pass(const std::vector<Constraint>& c);
// Exact rational as "p/q" and as a decimal.
std::string format_rational(const Rational& r);

// Named single-exponent perturbations of the paper schedule.
struct Mutant {
    std::string name;
    ParameterSchedule schedule;
};
std::vector<Mutant> single_exponent_mutants();

// ------------------------------------------------------------------ stages

// A velocity, pressure and stress given as functions of time on one grid. The time derivative of
// the velocity is optional; when absent it is taken by fourth-order differences.
struct StageState {
    int q = 0;
    TorusGrid grid;
    std::function<VectorField(double)> u;
    std::function<VectorField(double)> u_rate;
    std::function<ScalarField(double)> p;
    std::function<SymTensorField(double)> R;
};

// du/dt + div(u (x) u) + grad p - div R with collocation products.
VectorField stage_residual(const StageState& s, double t, double dt = 1e-6);

// Time cutoff: 1 for t <= 1/4, 0 for t >= 1/2.
double stage_cutoff(double t);
double stage_cutoff_rate(double t);

// Shear stage: u = A chi(t) sin(2 pi lambda0 x2) e1 with A = lambda0^(3 beta sigma / 4) and the
// matching stress; the nonlinear term vanishes identically.
StageState stage0_shear(const TorusGrid& g, long lambda0, const ParameterSchedule& s);
double shear_amplitude(long lambda0, const ParameterSchedule& s);

// u0 = chi (u_start * rho) + (1 - chi)(u_end * rho), p0 = 0, R0 = R0(du0/dt + div(u0 (x) u0)).
// The mollification radius is halved from ell_max until |u_start - u_start * rho|_2 <= eps / 2.
struct EndpointStage {
    StageState state;
    double ell = 0;
    double closeness = 0;  // |u_start - u_start * rho|_2
};
EndpointStage stage0_endpoints(const VectorField& u_start, const VectorField& u_end, double eps, double ell_max = 0.1);

// Space-time mollification with radius ell: time by a fixed Gauss rule on the kernel (the nodes move
// with t, so time derivatives commute with it), space by the Fourier multiplier.
// R_ell = R * rho + u_ell (x) u_ell - (u (x) u) * rho.
StageState mollify_stage(const StageState& s, double ell, int time_nodes = 24);

struct ToyParameters {
    int lambda = 16;
    double tau = 1.0 / 16;
    double delta = 0.05;
    double scale = 0;             // r_{q+1}; 0 picks r_max / max a_i^k
    double r_max = 0.05;          // largest block scale when the scale is picked automatically
    double ell = 1.0 / 64;        // mollification radius
    int interval = 5;             // which T^k is assembled
    BlockSetup block;
    QuadratureOptions quadrature;
    int average_panels = 16;      // Simpson panels for the time average of the coefficients
    int samples_per_quarter = 2;  // residual sample times per quarter (plateau and ramp)
    double dt = 2e-7;             // finite-difference step of the time derivatives
};

struct StageSampleReport {
    double t = 0;
    int quarter = 0;  // 0 at the interval ends
    double residual_L2 = 0, rate_L2 = 0, relative = 0;
    double div_max = 0;
    double boundary_delta = 0;  // max|u_{q+1} - u_ell| (meaningful at the interval ends)
    double Q_max = 0;
    std::array<double, 6> stress_L1{};  // linear, corrector, frozen-time, source, block, cancellation
};

struct AssembledStage {
    std::vector<StageSampleReport> samples;
    std::array<Cell, 4> cells;
    std::array<double, 4> G_L1{};
    double scale = 0;  // r_{q+1} used for the cells
    double max_relative = 0;
    double max_div = 0;
    double max_boundary = 0;
    // velocity, pressure and stress of the new stage at the sample times
    std::vector<VectorField> u;
    std::vector<ScalarField> p;
    std::vector<SymTensorField> R;
    std::vector<VectorField> u_ell;
};

// Builds u_{q+1} = u_ell + sum V + Q on one interval T^k with the new pressure and the six-part
// stress and measures the Euler-Reynolds residual relative to |du/dt| at the sample times.
AssembledStage assemble_stage(const StageState& s, const ToyParameters& tp);

struct StageDiagnostics {
    double t = 0;
    double R_L1 = 0, u_L2 = 0, Du_Lpbar = 0, vort_Lp = 0;
};
StageDiagnostics diagnose(const VectorField& u, const SymTensorField& R, double pbar, double p, double t = 0);
// Second-order centered-difference curl, the oracle for the spectral one.
ScalarField curl_fd(const VectorField& u);

}  // namespace eulerci
