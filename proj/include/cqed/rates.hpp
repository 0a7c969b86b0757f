// Two-state switching-rate reduction of the slow Liouvillian dynamics:
// closed-form occupancy evolution and rate extraction via the metastable
// decomposition of the slow eigenmode.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cqed/solvers.hpp"

namespace cqed {

struct SwitchingRates {
    double gamma_bd = 0.0;  // bright -> dim (1/s)
    double gamma_db = 0.0;  // dim -> bright (1/s)

    double t_s() const { return 1.0 / (gamma_bd + gamma_db); }
};

struct MetastableSplit {
    DensityMatrix rho_bright;
    DensityMatrix rho_dim;
    double p_b_ss = 0.0;
    double p_d_ss = 0.0;
    std::vector<std::string> flags;
};

struct OccupancyTrace {
    std::vector<double> times;
    std::vector<double> p_b;
    std::vector<double> p_d;
};

// Closed-form relaxation of (p_b, p_d): equilibrium plus a single
// exponential with time constant 1/(gamma_bd + gamma_db). p_b0 in [0, 1].
OccupancyTrace occupancy_evolution(const SwitchingRates& rates, double p_b0,
                                   const std::vector<double>& t_grid);

// Splits the slow manifold span{rho_ss, rho1} at the extremal eigenvalues
// of the left slow mode, labels the extremes bright/dim by |tr(rho a)|
// (falling back to <a^dag a> when near-degenerate), and inverts the rate
// model: Gamma_db = p_b_ss / T_s, Gamma_bd = p_d_ss / T_s. Requires the
// spectral result to carry the left mode. Gap-separation and realness
// violations are reported in MetastableSplit::flags.
std::pair<SwitchingRates, MetastableSplit> extract_rates(const SpectralResult& spectral,
                                                         const SparseMatrix& a_op);

}  // namespace cqed
