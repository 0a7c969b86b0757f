#include "cqed/duffing.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqed {

DressedLadder dressed_ladder(const DeviceParams& dev, int n_ladder,
                             int cavity_margin, int n_trans) {
    if (n_ladder < 2) throw std::invalid_argument("dressed_ladder: need n_ladder >= 2");
    HilbertSpace space(n_ladder + cavity_margin, n_trans);

    TransmonSpectrum ts = diagonalize_transmon(dev.E_J, dev.E_C, n_trans);
    coupling_matrix(ts, dev.g0);
    GjcModel undriven = build_gjc(dev, DriveParams(0.0, 0.0), space, &ts);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        DenseMatrix(undriven.h_rot).real());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dressed_ladder: eigensolver failed");

    DressedLadder ladder{{}, {}, {}, space};
    for (int m = 0; m < n_ladder; ++m) {
        const int product_idx = space.index(m, 0);
        int best = -1;
        double best_ov = 0.0;
        for (int k = 0; k < space.dim(); ++k) {
            const double ov = es.eigenvectors()(product_idx, k) *
                              es.eigenvectors()(product_idx, k);
            if (ov > best_ov) {
                best_ov = ov;
                best = k;
            }
        }
        if (best_ov <= 0.5) {
            std::ostringstream msg;
            msg << "dressed_ladder: labeling overlap " << best_ov << " <= 0.5 for m = " << m
                << " (avoided-crossing contamination)";
            throw std::runtime_error(msg.str());
        }
        Eigen::VectorXd v = es.eigenvectors().col(best);
        if (v(product_idx) < 0) v *= -1.0;  // phase convention
        ladder.energies.push_back(es.eigenvalues()(best));
        ladder.states.push_back(v.cast<Complex>());
        ladder.overlaps.push_back(best_ov);
    }
    return ladder;
}

DuffingParams project_duffing(const DressedLadder& ladder, const DeviceParams& dev) {
    if (ladder.energies.size() < 4)
        throw std::invalid_argument("project_duffing: ladder too short (need >= 4 states)");

    const double e0 = ladder.energies[0], e1 = ladder.energies[1], e2 = ladder.energies[2];
    DuffingParams p;
    p.omega_tilde_c = e1 - e0;
    p.kerr = (e2 - e0) - 2.0 * (e1 - e0);

    const SparseMatrix a = annihilator_cavity(ladder.space).mat;
    const SparseMatrix b = lowering_transmon(ladder.space).mat;
    const SparseMatrix nb = SparseMatrix(b.adjoint() * b);
    const DenseVector& psi0 = ladder.states[0];
    const DenseVector& psi1 = ladder.states[1];

    p.r_a = std::abs(psi0.dot(a * psi1));
    p.r_b = std::abs(psi0.dot(b * psi1));
    p.r_nb = (psi1.dot(nb * psi1) - psi0.dot(nb * psi0)).real();
    p.eps_tilde_ratio = p.r_a;

    const double ra2 = p.r_a * p.r_a, rb2 = p.r_b * p.r_b;
    const double down = ra2 * (1.0 + dev.n_c) * dev.kappa + rb2 * (1.0 + dev.n_t) * dev.gamma;
    const double up = ra2 * dev.n_c * dev.kappa + rb2 * dev.n_t * dev.gamma;
    p.kappa_tilde = down - up;
    p.n_tilde_c = (p.kappa_tilde > 0) ? up / p.kappa_tilde : 0.0;
    p.kappa_tilde_phi = p.r_nb * p.r_nb * dev.gamma_phi;
    return p;
}

DuffingModel build_duffing(const DuffingParams& p, const DriveParams& drive, int n_cav) {
    if (n_cav < 2) throw std::invalid_argument("build_duffing: cutoff too small");
    const double eps_tilde = p.eps_tilde_ratio * drive.eps;

    // Fock-occupancy estimate for the driven Kerr oscillator; a cutoff below
    // the expected bright-state photon number is a usage error.
    const double delta = p.omega_tilde_c - drive.omega_d;
    const double damp = std::max(p.kappa_tilde / 2.0, 1e-300);
    const double n_est = (eps_tilde * eps_tilde) / (delta * delta + damp * damp);
    if (double(n_cav) < std::min(n_est, std::abs(2.0 * delta / std::max(std::abs(p.kerr), 1e-300))))
        throw std::invalid_argument("build_duffing: cutoff below drive-scaled occupancy estimate");

    DuffingModel model{n_cav, p, DriveParams(drive.omega_d, eps_tilde), SparseMatrix(n_cav, n_cav), {}};

    std::vector<Eigen::Triplet<Complex>> t;
    for (int m = 0; m < n_cav; ++m)
        t.emplace_back(m, m, delta * double(m) + 0.5 * p.kerr * double(m) * double(m - 1));
    for (int m = 0; m + 1 < n_cav; ++m) {
        const double e = eps_tilde * std::sqrt(double(m + 1));
        t.emplace_back(m + 1, m, e);
        t.emplace_back(m, m + 1, e);
    }
    SparseMatrix h(n_cav, n_cav);
    h.setFromTriplets(t.begin(), t.end());
    model.h_rot = prune_sparse(h);

    const SparseMatrix a = fock_annihilator(n_cav);
    model.collapse = {
        {"cavity_decay", SparseMatrix(std::sqrt((1.0 + p.n_tilde_c) * p.kappa_tilde) * a)},
        {"cavity_excitation", SparseMatrix(std::sqrt(p.n_tilde_c * p.kappa_tilde) * a.adjoint())},
        {"dephasing", SparseMatrix(std::sqrt(p.kappa_tilde_phi) * fock_number(n_cav))},
    };
    return model;
}

}  // namespace cqed
