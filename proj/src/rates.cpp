#include "cqed/rates.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace cqed {

OccupancyTrace occupancy_evolution(const SwitchingRates& rates, double p_b0,
                                   const std::vector<double>& t_grid) {
    if (p_b0 < 0.0 || p_b0 > 1.0)
        throw std::invalid_argument("occupancy_evolution: p_b0 outside [0, 1]");
    if (rates.gamma_bd < 0 || rates.gamma_db < 0)
        throw std::invalid_argument("occupancy_evolution: negative rate");
    const double total = rates.gamma_bd + rates.gamma_db;
    const double p_eq = (total > 0) ? rates.gamma_db / total : p_b0;

    OccupancyTrace trace;
    for (double t : t_grid) {
        const double pb = p_eq + (p_b0 - p_eq) * std::exp(-total * t);
        trace.times.push_back(t);
        trace.p_b.push_back(pb);
        trace.p_d.push_back(1.0 - pb);
    }
    return trace;
}

std::pair<SwitchingRates, MetastableSplit> extract_rates(const SpectralResult& spectral,
                                                         const SparseMatrix& a_op) {
    if (spectral.ell1_left.size() == 0)
        throw std::invalid_argument("extract_rates: spectral result lacks the left mode");

    MetastableSplit split;
    const double re1 = -spectral.adr;
    if (std::abs(spectral.lambda2.real()) <= 5.0 * std::abs(re1))
        split.flags.push_back("gap separation |Re l2| <= 5 |Re l1|: two-state reduction suspect");
    if (std::abs(spectral.lambda1.imag()) > 1e-6 * std::abs(re1))
        split.flags.push_back("oscillatory slow mode: Im(lambda1) not negligible");

    // Slow-mode coefficient of a state rho is tr(l1^dag rho); its extreme
    // values over states are the extremal eigenvalues of the hermitized l1.
    const DenseMatrix herm = 0.5 * (spectral.ell1_left + spectral.ell1_left.adjoint());
    const double herm_defect =
        (spectral.ell1_left - herm).cwiseAbs().maxCoeff();
    if (herm_defect > 1e-6 * herm.cwiseAbs().maxCoeff())
        split.flags.push_back("left mode significantly non-hermitian");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
    const double c_min = es.eigenvalues().minCoeff();
    const double c_max = es.eigenvalues().maxCoeff();
    if (!(c_max > 0 && c_min < 0))
        split.flags.push_back("steady state not interior to the metastable segment");

    DenseMatrix rho1 = spectral.rho1_right;
    DensityMatrix rho_hi(spectral.rho_ss.rho + c_max * rho1);
    DensityMatrix rho_lo(spectral.rho_ss.rho + c_min * rho1);
    rho_hi.hermitize_and_normalize();
    rho_lo.hermitize_and_normalize();

    const double span = c_max - c_min;
    double p_hi = (span > 0) ? -c_min / span : 0.5;
    p_hi = std::min(1.0, std::max(0.0, p_hi));

    const DenseMatrix a_dense(a_op);
    auto amp = [&](const DensityMatrix& r) { return std::abs((r.rho * a_dense).trace()); };
    auto num = [&](const DensityMatrix& r) {
        return ((a_dense.adjoint() * a_dense) * r.rho).trace().real();
    };
    const double amp_hi = amp(rho_hi), amp_lo = amp(rho_lo);
    bool hi_is_bright;
    if (std::abs(amp_hi - amp_lo) > 1e-3 * std::max(amp_hi, amp_lo)) {
        hi_is_bright = amp_hi > amp_lo;
    } else {
        hi_is_bright = num(rho_hi) > num(rho_lo);
        split.flags.push_back("amplitudes near-equal: labeled by photon number");
    }

    if (hi_is_bright) {
        split.rho_bright = rho_hi;
        split.rho_dim = rho_lo;
        split.p_b_ss = p_hi;
    } else {
        split.rho_bright = rho_lo;
        split.rho_dim = rho_hi;
        split.p_b_ss = 1.0 - p_hi;
    }
    split.p_d_ss = 1.0 - split.p_b_ss;

    SwitchingRates rates;
    rates.gamma_db = split.p_b_ss * spectral.adr;
    rates.gamma_bd = split.p_d_ss * spectral.adr;
    return {rates, split};
}

}  // namespace cqed
