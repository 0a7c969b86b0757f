// Charge-basis diagonalization of the transmon and the level-dependent
// cavity couplings derived from its charge matrix elements.
#pragma once

#include <vector>

#include "cqed/quantum_core.hpp"

namespace cqed {

// Physical constants of the device. All frequencies and rates are angular
// (rad/s); the config layer converts from the /2pi values users enter.
struct DeviceParams {
    double omega_c = 0.0;    // cavity frequency
    double E_J = 0.0;        // Josephson energy (as angular frequency, E/hbar)
    double E_C = 0.0;        // charging energy (as angular frequency)
    double g0 = 0.0;         // bare qubit-cavity coupling
    double delta0 = 0.0;     // quoted detuning, diagnostic only (0 = unset)
    double kappa = 0.0;      // cavity relaxation
    double gamma = 0.0;      // transmon relaxation
    double gamma_phi = 0.0;  // transmon pure dephasing
    double n_c = 0.0;        // cavity bath occupation
    double n_t = 0.0;        // transmon bath occupation

    // Throws on invalid rates/occupations; returns a warning string for
    // soft checks (E_J/E_C outside the transmon regime), empty if clean.
    std::string validate() const;
};

struct TransmonSpectrum {
    std::vector<double> omega_n;      // eigenfrequencies, omega_0 = 0 (rad/s)
    Eigen::MatrixXd g_matrix;         // couplings g_{m,n} (rad/s), real symmetric
    Eigen::MatrixXd charge_elems;     // <m|n_hat|n> in the eigenbasis
};

// Lowest n_levels eigenpairs of the charge-basis transmon Hamiltonian
//   H = 4 E_C (q - n_g)^2 - (E_J/2) sum_q (|q><q+1| + h.c.)
// with q in [-charge_cutoff, charge_cutoff]. Eigenvector phases are rotated
// so that <n|n_hat|n+1> > 0.
TransmonSpectrum diagonalize_transmon(double E_J, double E_C, int n_levels,
                                      int charge_cutoff = 20, double n_g = 0.0);

// Fills g_matrix: g_{m,n} = g0 * <m|n_hat|n> / <0|n_hat|1>, so g_{0,1} = g0.
void coupling_matrix(TransmonSpectrum& spec, double g0);

// Delta_n = omega_{n+1} - omega_n - omega_c for each retained transition.
std::vector<double> detunings(const TransmonSpectrum& spec, double omega_c);

}  // namespace cqed
