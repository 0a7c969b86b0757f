#include "cqed/gjc.hpp"

#include <sstream>

namespace cqed {

GjcModel build_gjc(const DeviceParams& dev, const DriveParams& drive,
                   const HilbertSpace& space, const TransmonSpectrum* spec) {
    TransmonSpectrum ts;
    if (spec) {
        if (int(spec->omega_n.size()) < space.n_trans)
            throw std::invalid_argument("build_gjc: supplied spectrum has too few levels");
        ts = *spec;
    } else {
        ts = diagonalize_transmon(dev.E_J, dev.E_C, space.n_trans);
        coupling_matrix(ts, dev.g0);
    }

    GjcModel model{space, dev, drive, ts, SparseMatrix(space.dim(), space.dim()), {}, {}};
    if (auto w = dev.validate(); !w.empty()) model.warnings.push_back(w);

    const int nc = space.n_cav, nt = space.n_trans;
    std::vector<Eigen::Triplet<Complex>> t;
    for (int m = 0; m < nc; ++m)
        for (int n = 0; n < nt; ++n)
            t.emplace_back(space.index(m, n), space.index(m, n),
                           double(m) * (dev.omega_c - drive.omega_d) +
                               (ts.omega_n[n] - double(n) * drive.omega_d));
    for (int m = 0; m + 1 < nc; ++m) {
        const double sq = std::sqrt(double(m + 1));
        for (int n = 0; n + 1 < nt; ++n) {
            // a^dag |n><n+1| : (m, n+1) -> (m+1, n), plus hermitian partner
            const double g = ts.g_matrix(n, n + 1) * sq;
            t.emplace_back(space.index(m + 1, n), space.index(m, n + 1), g);
            t.emplace_back(space.index(m, n + 1), space.index(m + 1, n), g);
        }
        for (int n = 0; n < nt; ++n) {
            t.emplace_back(space.index(m + 1, n), space.index(m, n), drive.eps * sq);
            t.emplace_back(space.index(m, n), space.index(m + 1, n), drive.eps * sq);
        }
    }
    SparseMatrix h(space.dim(), space.dim());
    h.setFromTriplets(t.begin(), t.end());
    model.h_rot = prune_sparse(h);

    const auto deltas = detunings(ts, dev.omega_c);
    for (int n = 0; n + 1 < nt && n < int(deltas.size()); ++n) {
        const double ratio = std::abs(ts.g_matrix(n, n + 1) / deltas[n]);
        if (ratio > 0.5) {
            std::ostringstream w;
            w << "|g_" << n << "/Delta_" << n << "| = " << ratio
              << " > 0.5: dispersive projection assumptions degrade";
            model.warnings.push_back(w.str());
        }
    }

    const SparseMatrix a = annihilator_cavity(space).mat;
    const SparseMatrix b = lowering_transmon(space).mat;
    const SparseMatrix nb = SparseMatrix(b.adjoint() * b);
    model.collapse = {
        {"cavity_decay", SparseMatrix(std::sqrt((dev.n_c + 1.0) * dev.kappa) * a)},
        {"cavity_excitation", SparseMatrix(std::sqrt(dev.n_c * dev.kappa) * a.adjoint())},
        {"transmon_dephasing", SparseMatrix(std::sqrt(dev.gamma_phi) * nb)},
        {"transmon_decay", SparseMatrix(std::sqrt((dev.n_t + 1.0) * dev.gamma) * b)},
        {"transmon_excitation", SparseMatrix(std::sqrt(dev.n_t * dev.gamma) * b.adjoint())},
    };
    return model;
}

DensityMatrix initial_state(const HilbertSpace& space, double theta) {
    if (theta < 0 || theta > kTwoPi / 2)
        throw std::invalid_argument("initial_state: theta must lie in [0, pi]");
    DenseVector psi = DenseVector::Zero(space.dim());
    psi(space.index(0, 0)) = std::cos(theta / 2.0);
    psi(space.index(0, 1)) = std::sin(theta / 2.0);
    DensityMatrix rho(psi * psi.adjoint());
    return rho;
}

}  // namespace cqed
