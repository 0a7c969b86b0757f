// Steady states, Liouvillian spectral gaps and transient evolution.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cqed/liouvillian.hpp"

namespace cqed {

struct SteadyStateOpts {
    double residual_tol = 1e-10;  // relative to ||L||_inf ||vec(rho)||_inf
};

// rho_ss with ||L vec(rho_ss)||_inf < tol * ||L||_inf * ||vec(rho_ss)||_inf,
// hermitized and trace-normalized. Sparse direct factorization with one row
// replaced by the trace functional.
DensityMatrix steady_state(const Liouvillian& liouv, const SteadyStateOpts& opts = {});

struct SpectralResult {
    double adr = 0.0;       // asymptotic decay rate, -Re(lambda1) > 0 (rad/s)
    double t_s = 0.0;       // 1/adr (s)
    Complex lambda1{};      // full slow eigenvalue
    Complex lambda2{};      // next eigenvalue (gap-separation diagnostics)
    DensityMatrix rho_ss;
    DenseMatrix rho1_right;  // traceless slow right mode
    DenseMatrix ell1_left;   // slow left mode, tr(ell1^dag rho1) = 1
    std::vector<std::string> warnings;
};

struct SpectralOpts {
    int ncv = 40;             // Arnoldi subspace dimension
    int max_restarts = 60;
    double tol = 1e-12;       // Ritz residual tolerance, relative to ||L||
    double sigma_rel = 1e-9;  // shift = sigma_rel * ||L||_inf (positive real)
    int dense_cutoff = 60;    // use a dense eigendecomposition for D <= this
    bool want_left = true;    // also compute the left slow eigenmode
};

// Nonzero eigenvalue of L with largest real part via shift-invert Arnoldi
// with deflation of the steady-state zero mode; dense fallback at small D.
SpectralResult spectral_gap(const Liouvillian& liouv, const SpectralOpts& opts = {});

// All eigenvalues of the dense superoperator, sorted by descending real
// part. Oracle-grade; only sensible at small D.
std::vector<Complex> dense_spectrum(const Liouvillian& liouv);

struct TransientTrace {
    std::vector<double> times;                      // s
    std::vector<Complex> amp;                       // tr(rho(t) a)
    std::vector<std::vector<double>> transmon_pops; // reduced transmon diagonal
    std::string integrator;                         // "rk45" or "krylov"
};

struct EvolveOpts {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double stiffness_switch = 1e3;  // Krylov stepping when ||L|| dt_out exceeds this
    int krylov_dim = 30;
    bool check_physical = true;     // trace/hermiticity/positivity at output times
};

// Integrates vec(rho)' = L vec(rho) through the output grid, recording
// tr(rho a) and the reduced transmon populations. a_op must act on the same
// space as liouv; n_trans = 1 for single-mode models.
TransientTrace evolve(const Liouvillian& liouv, const DensityMatrix& rho0,
                      const std::vector<double>& t_grid, const SparseMatrix& a_op,
                      int n_trans = 1, const EvolveOpts& opts = {});

struct SlowdownFit {
    double t_s = 0.0;       // fitted slow time constant (s)
    double amplitude = 0.0; // coefficient of the decaying exponential
    double offset = 0.0;    // asymptotic level
    double residual = 0.0;  // rms misfit over the window
    bool low_confidence = false;  // window shorter than 2 T_s
    bool undefined = false;       // no resolvable decay (constant trace)
};

// Least-squares fit of |amp|(t) to c0 + c1 exp(-t/T_s) over [t0, t1].
SlowdownFit fit_slowdown(const TransientTrace& trace, double t0, double t1);

struct ConvergeResult {
    HilbertSpace space;
    bool converged = false;
    double last_change = 0.0;
    std::vector<std::pair<HilbertSpace, double>> history;  // (space, observable)
};

// Walks a truncation ladder (n_cav * 1.25, n_trans + 1 per probe) until the
// observable is stable to rel_tol; reports the trend when the cap is hit.
ConvergeResult converge_truncation(
    const std::function<double(const HilbertSpace&)>& observable,
    HilbertSpace start, double rel_tol, int max_cav = 200, int max_trans = 12);

}  // namespace cqed
