// Rotating-frame generalized Jaynes-Cummings model: Hamiltonian assembly
// and the five Lindblad collapse channels.
#pragma once

#include <string>
#include <vector>

#include "cqed/density.hpp"
#include "cqed/quantum_core.hpp"
#include "cqed/transmon.hpp"

namespace cqed {

struct DriveParams {
    double omega_d = 0.0;  // drive frequency (rad/s)
    double eps = 0.0;      // drive amplitude (rad/s), >= 0

    DriveParams() = default;
    DriveParams(double wd, double e) : omega_d(wd), eps(e) {
        if (e < 0) throw std::invalid_argument("DriveParams: eps must be >= 0");
    }
};

// dBm <-> drive-amplitude conversion. The mapping is a calibration choice:
// eps(P) = eps_ref * 10^((P - p_ref)/20), amplitude-linear in sqrt(power).
struct PowerCalibration {
    double eps_ref = 0.0;    // eps at the reference power (rad/s)
    double p_ref_dbm = 0.0;  // reference power (dBm)

    double eps_at(double p_dbm) const {
        return eps_ref * std::pow(10.0, (p_dbm - p_ref_dbm) / 20.0);
    }
};

// Collapse operator with its rate already absorbed (op = sqrt(rate) * c).
struct CollapseChannel {
    std::string label;
    SparseMatrix op;
};

struct GjcModel {
    HilbertSpace space;
    DeviceParams dev;
    DriveParams drive;
    TransmonSpectrum spectrum;
    SparseMatrix h_rot;                     // rotating frame, time-independent
    std::vector<CollapseChannel> collapse;  // the 5 channels, in a fixed order
    std::vector<std::string> warnings;
};

// Assembles the rotating-frame RWA Hamiltonian
//   H = sum_n (omega_n - n*omega_d)|n><n| + (omega_c - omega_d) a^dag a
//     + sum_n g_{n,n+1} (a|n+1><n| + a^dag|n><n+1|) + eps (a + a^dag)
// together with the collapse channels
//   sqrt((n_c+1)kappa) a, sqrt(n_c kappa) a^dag, sqrt(gamma_phi) b^dag b,
//   sqrt((n_t+1)gamma) b, sqrt(n_t gamma) b^dag.
// If spec is null the transmon is diagonalized from dev.E_J, dev.E_C.
GjcModel build_gjc(const DeviceParams& dev, const DriveParams& drive,
                   const HilbertSpace& space, const TransmonSpectrum* spec = nullptr);

// |0_cav><0_cav| (x) |psi><psi| with |psi> = cos(theta/2)|0> + sin(theta/2)|1>.
DensityMatrix initial_state(const HilbertSpace& space, double theta);

}  // namespace cqed
