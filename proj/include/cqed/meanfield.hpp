// Semiclassical (coherent-state) equations of motion: normal-ordered series
// for the multilevel model, fixed points, stability, bistability boundaries
// and branch occupations; closed-form treatment of the Kerr oscillator.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cqed/duffing.hpp"
#include "cqed/gjc.hpp"
#include "cqed/transmon.hpp"

namespace cqed {

// (-1)^chi / (chi! sqrt(m! n!)) — weight of b^dag^{m+chi} b^{n+chi} in the
// normal-ordered expansion of |m><n|.
double normal_order_coeff(int m, int n, int chi);

struct MeanFieldParams {
    double delta_c = 0.0;               // omega_c - omega_d
    std::vector<double> delta_n;        // omega_n - n omega_d, n < n_trans
    std::vector<double> g_n;            // g_{n,n+1}, size n_trans - 1
    double eps = 0.0;
    double kappa = 0.0;
    double gamma_total = 0.0;           // gamma + gamma_phi
    int chi_max = 12;                   // series depth; raised adaptively
    double series_tol = 1e-10;

    int n_trans() const { return int(delta_n.size()); }
};

MeanFieldParams make_gjc_meanfield(const DeviceParams& dev, const DriveParams& drive,
                                   int n_trans, const TransmonSpectrum* spec = nullptr);

// <beta| |m><n| |beta> via the truncated normal-ordered series; throws when
// the tail bound cannot be met within the adaptive depth cap.
Complex coherent_matrix_element(int m, int n, Complex beta, int chi_max = 12,
                                double tol = 1e-10);

struct Drift {
    Complex d_alpha;
    Complex d_beta;
};

Drift drift(const MeanFieldParams& p, Complex alpha, Complex beta);

// Jacobian of the drift in the real coordinates
// (Re a, Im a, Re b, Im b), from analytic Wirtinger derivatives.
Eigen::Matrix4d drift_jacobian(const MeanFieldParams& p, Complex alpha, Complex beta);

enum class Stability { stable, unstable, marginal };

struct MeanFieldPoint {
    Complex alpha;
    Complex beta;
    Stability stable = Stability::unstable;
    std::array<Complex, 4> jacobian_eigs{};
};

// Newton roots of the drift over the default seed grid (5x5 alpha disk of
// radius 4 eps/kappa crossed with beta in {0, coupling estimate}), or over
// explicit seeds. Deduplicated; throws when no seed converges.
std::vector<MeanFieldPoint> find_fixed_points(
    const MeanFieldParams& p,
    const std::vector<std::pair<Complex, Complex>>& seeds = {});

int count_stable(const std::vector<MeanFieldPoint>& points);

// --- Kerr oscillator (single mode; beta fields unused) -----------------------

struct KerrMeanField {
    double delta = 0.0;  // omega_tilde_c - omega_d
    double kerr = 0.0;
    double kappa = 0.0;
    double eps = 0.0;    // already rescaled drive
};

// Roots of n [(delta + K n)^2 + (kappa/2)^2] = eps^2 with their phases and
// 2x2 linear stability.
std::vector<MeanFieldPoint> kerr_fixed_points(const KerrMeanField& p);

// Closed-form bistability window in eps at fixed detuning: the extrema of
// eps^2(n) from 3 K^2 n^2 + 4 delta K n + (delta^2 + kappa^2/4) = 0.
// Empty when the discriminant is negative (no bistable window).
std::optional<std::pair<double, double>> kerr_bistable_window(double delta, double kerr,
                                                              double kappa);

// --- boundary tracing --------------------------------------------------------

struct BoundaryPoint {
    double omega_d = 0.0;  // rad/s
    double eps = 0.0;      // rad/s
};

struct BistabilityBoundary {
    std::string model;                  // "gjc" or "duffing"
    std::vector<BoundaryPoint> lower;   // onset edge, one vertex per frequency column
    std::vector<BoundaryPoint> upper;   // exit edge (may be shorter when open)
    double onset_eps = 0.0;
    double onset_omega_d = 0.0;
    bool empty = true;
};

struct BoundaryGrid {
    double omega_lo = 0.0, omega_hi = 0.0;  // rad/s
    double eps_lo = 0.0, eps_hi = 0.0;      // rad/s
    int n_omega = 50, n_eps = 50;
    double eps_rel_tol = 1e-9;              // bisection refinement on the eps axis
};

// Scans stable-root counts over the grid and bisects every 1<->2 transition.
// counter(omega_d, eps) must return the stable fixed-point count.
BistabilityBoundary trace_boundary(const std::function<int(double, double)>& counter,
                                   const BoundaryGrid& grid, const std::string& model);

BistabilityBoundary trace_boundary_gjc(const DeviceParams& dev, int n_trans,
                                       const BoundaryGrid& grid,
                                       const TransmonSpectrum* spec = nullptr);
BistabilityBoundary trace_boundary_duffing(const DuffingParams& dp, const BoundaryGrid& grid);

// Drive calibration anchored to the multilevel mean-field onset: the minimum
// boundary eps over the frequency window maps to the reference power (dBm).
PowerCalibration calibrate_onset(const DeviceParams& dev, int n_trans,
                                 const BoundaryGrid& grid, double p_ref_dbm = -27.0,
                                 const TransmonSpectrum* spec = nullptr);

// Onset calibration with the scan window inferred from the dressed-ladder
// projection of the device (frequencies just below the dressed cavity line,
// drives bracketing the Kerr-oscillator onset estimate).
PowerCalibration default_calibration(const DeviceParams& dev, int n_trans = 5,
                                     double p_ref_dbm = -27.0);

// --- branch occupations ------------------------------------------------------

struct BranchPoint {
    double eps = 0.0;
    double n_cavity = 0.0;   // |alpha|^2
    double n_transmon = 0.0; // |beta|^2
    bool present = false;
};

struct BranchSweep {
    std::vector<BranchPoint> bright;
    std::vector<BranchPoint> dim;
    std::vector<int> reseeded;  // sweep indices where continuation jumped
};

// Continuation of the stable branches along an increasing eps sweep,
// labeled by |alpha|^2 ordering. builder(eps) yields the fixed points.
BranchSweep branch_occupations(
    const std::function<std::vector<MeanFieldPoint>(double)>& builder,
    const std::vector<double>& eps_values);

}  // namespace cqed
