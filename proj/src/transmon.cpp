#include "cqed/transmon.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqed {

std::string DeviceParams::validate() const {
    if (kappa < 0 || gamma < 0 || gamma_phi < 0)
        throw std::invalid_argument("DeviceParams: rates must be >= 0");
    if (n_c < 0 || n_c >= 1 || n_t < 0 || n_t >= 1)
        throw std::invalid_argument("DeviceParams: bath occupations must lie in [0, 1)");
    if (E_J <= 0 || E_C <= 0)
        throw std::invalid_argument("DeviceParams: E_J and E_C must be positive");
    std::ostringstream warn;
    if (E_J / E_C <= 20)
        warn << "E_J/E_C = " << E_J / E_C << " is outside the transmon regime (> 20 expected)";
    return warn.str();
}

TransmonSpectrum diagonalize_transmon(double E_J, double E_C, int n_levels,
                                      int charge_cutoff, double n_g) {
    if (E_J <= 0 || E_C <= 0)
        throw std::invalid_argument("diagonalize_transmon: E_J, E_C must be positive");
    if (charge_cutoff < 20)
        throw std::invalid_argument("diagonalize_transmon: charge cutoff must be >= 20");
    const int dim = 2 * charge_cutoff + 1;
    if (n_levels < 2 || n_levels > dim / 3)
        throw std::invalid_argument("diagonalize_transmon: n_levels exceeds reliable charge cutoff");

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double q = double(i - charge_cutoff) - n_g;
        h(i, i) = 4.0 * E_C * q * q;
        if (i + 1 < dim) {
            h(i, i + 1) = -0.5 * E_J;
            h(i + 1, i) = -0.5 * E_J;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("diagonalize_transmon: eigensolver failed");

    Eigen::MatrixXd vecs = es.eigenvectors().leftCols(n_levels);
    Eigen::VectorXd qdiag(dim);
    for (int i = 0; i < dim; ++i) qdiag(i) = double(i - charge_cutoff);

    // Fix phases so nearest-neighbor charge elements come out positive.
    for (int n = 0; n + 1 < n_levels; ++n) {
        const double elem = vecs.col(n).dot(qdiag.asDiagonal() * vecs.col(n + 1));
        if (elem < 0) vecs.col(n + 1) *= -1.0;
    }

    TransmonSpectrum spec;
    spec.omega_n.resize(n_levels);
    for (int n = 0; n < n_levels; ++n) spec.omega_n[n] = es.eigenvalues()(n) - es.eigenvalues()(0);
    spec.charge_elems = vecs.transpose() * qdiag.asDiagonal() * vecs;
    spec.g_matrix = Eigen::MatrixXd::Zero(n_levels, n_levels);
    return spec;
}

void coupling_matrix(TransmonSpectrum& spec, double g0) {
    if (spec.charge_elems.size() == 0)
        throw std::runtime_error("coupling_matrix: charge elements not computed");
    const double ref = spec.charge_elems(0, 1);
    if (std::abs(ref) < 1e-12)
        throw std::runtime_error("coupling_matrix: vanishing <0|n|1> element");
    spec.g_matrix = (g0 / ref) * spec.charge_elems;
}

std::vector<double> detunings(const TransmonSpectrum& spec, double omega_c) {
    std::vector<double> d;
    for (size_t n = 0; n + 1 < spec.omega_n.size(); ++n)
        d.push_back(spec.omega_n[n + 1] - spec.omega_n[n] - omega_c);
    return d;
}

}  // namespace cqed
