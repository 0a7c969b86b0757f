// Dressed-state projection of the GJC model onto the transmon-ground
// ladder, yielding a single Kerr oscillator with effective Lindblad rates.
#pragma once

#include <vector>

#include "cqed/gjc.hpp"

namespace cqed {

struct DressedLadder {
    std::vector<double> energies;     // E_{m,0}, m = 0 .. n_ladder-1 (rad/s)
    std::vector<DenseVector> states;  // dressed eigenvectors, phase-fixed
    std::vector<double> overlaps;     // |<m,0|psi_{m,0}>|^2 labeling weights
    HilbertSpace space;               // space the diagonalization ran on
};

struct DuffingParams {
    double omega_tilde_c = 0.0;   // dressed cavity frequency (rad/s)
    double kerr = 0.0;            // Kerr constant K (rad/s), < 0 for transmons
    double r_a = 0.0;             // cavity-operator projection coefficient
    double r_b = 0.0;             // transmon-lowering projection coefficient
    double r_nb = 0.0;            // transmon-number projection coefficient
    double eps_tilde_ratio = 0.0; // = r_a
    double kappa_tilde = 0.0;     // effective cavity relaxation
    double n_tilde_c = 0.0;       // effective bath occupation
    double kappa_tilde_phi = 0.0; // effective dephasing
};

struct DuffingModel {
    int n_cav = 0;  // single-mode Fock cutoff
    DuffingParams params;
    DriveParams drive;  // drive.eps holds the projected amplitude eps_tilde
    SparseMatrix h_rot;
    std::vector<CollapseChannel> collapse;  // 3 channels
};

// Diagonalizes the undriven RWA GJC Hamiltonian and extracts the n_ladder
// lowest dressed states with transmon-ground character, labeled by overlap
// with the product states |m,0>. The diagonalization uses a cavity cutoff
// of n_ladder + margin to protect the retained states from truncation.
// Throws if any labeling overlap drops to <= 0.5 (avoided-crossing
// contamination).
DressedLadder dressed_ladder(const DeviceParams& dev, int n_ladder,
                             int cavity_margin = 6, int n_trans = 6);

// omega_tilde_c = E1 - E0, K = (E2 - E0) - 2(E1 - E0);
// r_a = <psi_00|a|psi_10>, r_b = <psi_00|b|psi_10>,
// r_nb = <psi_10|b^dag b|psi_10> - <psi_00|b^dag b|psi_00>;
// kappa_tilde(1+n~_c) = r_a^2(1+n_c)kappa + r_b^2(1+n_t)gamma,
// kappa_tilde n~_c    = r_a^2 n_c kappa   + r_b^2 n_t gamma,
// kappa_tilde_phi     = r_nb^2 gamma_phi.
DuffingParams project_duffing(const DressedLadder& ladder, const DeviceParams& dev);

// Rotating-frame single-mode Kerr model:
//   H = (omega_tilde_c - omega_d) a^dag a + (K/2) a^dag a^dag a a
//     + eps_tilde (a + a^dag)
// with channels sqrt((1+n~_c)k~) a, sqrt(n~_c k~) a^dag, sqrt(k~_phi) a^dag a.
// drive.eps is the bare amplitude; the builder applies eps_tilde_ratio.
DuffingModel build_duffing(const DuffingParams& p, const DriveParams& drive, int n_cav);

}  // namespace cqed
