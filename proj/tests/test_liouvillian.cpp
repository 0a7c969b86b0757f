#include <algorithm>
#include <cstdio>
#include <random>

#include "doctest.h"

#include "cqed/liouvillian.hpp"
#include "cqed/solvers.hpp"

using namespace cqed;

namespace {

DenseMatrix random_hermitian(int d, std::mt19937& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(dist(gen), dist(gen));
    return DenseMatrix(0.5 * (m + m.adjoint()));
}

DenseMatrix random_state(int d, std::mt19937& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(dist(gen), dist(gen));
    DenseMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    return rho;
}

DenseMatrix lindblad_rhs(const DenseMatrix& h, const std::vector<DenseMatrix>& cs,
                         const DenseMatrix& rho) {
    DenseMatrix d = Complex(0, -1) * (h * rho - rho * h);
    for (const auto& c : cs)
        d += c * rho * c.adjoint() -
             0.5 * (c.adjoint() * c * rho + rho * c.adjoint() * c);
    return d;
}

}  // namespace

TEST_CASE("coherent part rotates off-diagonals at the Bohr frequencies") {
    const int d = 4;
    SparseMatrix h(d, d);
    const double e[4] = {0.0, 0.7, 1.9, 3.2};
    for (int i = 0; i < d; ++i) h.insert(i, i) = e[i];
    Liouvillian l = assemble(h, {});

    std::mt19937 gen(11);
    DensityMatrix rho(random_state(d, gen));
    DenseMatrix drho = apply(l, rho);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const Complex expect = Complex(0, -(e[i] - e[j])) * rho.rho(i, j);
            CHECK(std::abs(drho(i, j) - expect) < 1e-13);
        }
}

TEST_CASE("lossy cavity eigenvalues in the two-level truncation") {
    const double kappa = 0.37;
    HilbertSpace s(2, 2);  // only the cavity factor participates
    SparseMatrix a2(2, 2);
    a2.insert(0, 1) = std::sqrt(kappa);
    std::vector<CollapseChannel> ch{{"decay", a2}};
    Liouvillian l = assemble(SparseMatrix(2, 2), ch);

    std::vector<Complex> ev = dense_spectrum(l);
    REQUIRE(ev.size() == 4);
    // descending real part: {0, -kappa/2, -kappa/2, -kappa}
    CHECK(std::abs(ev[0]) < 1e-14);
    CHECK(ev[1].real() == doctest::Approx(-kappa / 2));
    CHECK(ev[2].real() == doctest::Approx(-kappa / 2));
    CHECK(ev[3].real() == doctest::Approx(-kappa));
    for (const Complex& z : ev) CHECK(std::abs(z.imag()) < 1e-14);
}

TEST_CASE("generator matches the dense right-hand side on random inputs") {
    std::mt19937 gen(23);
    const int d = 6;
    DenseMatrix h = random_hermitian(d, gen);
    std::vector<DenseMatrix> cs;
    std::vector<CollapseChannel> channels;
    for (int k = 0; k < 3; ++k) {
        DenseMatrix c(d, d);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) c(i, j) = Complex(dist(gen), dist(gen));
        cs.push_back(c);
        channels.push_back({"c" + std::to_string(k), c.sparseView()});
    }
    Liouvillian l = assemble(h.sparseView(), channels);

    for (int rep = 0; rep < 4; ++rep) {
        DensityMatrix rho(random_state(d, gen));
        DenseMatrix got = apply(l, rho);
        DenseMatrix expect = lindblad_rhs(h, cs, rho.rho);
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12 * expect.cwiseAbs().maxCoeff());
        // trace preservation and hermiticity preservation of the flow
        CHECK(std::abs(got.trace()) < 1e-12);
        CHECK((got - got.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("spectrum sits in the closed left half plane with a unique kernel") {
    DeviceParams dev;
    dev.omega_c = 5.0;
    dev.E_J = 100.0;
    dev.E_C = 1.0;
    dev.g0 = 0.2;
    dev.kappa = 0.3;
    dev.gamma = 0.05;
    dev.gamma_phi = 0.02;
    TransmonSpectrum s;
    s.omega_n = {0.0, 4.7, 9.1};
    s.g_matrix = Eigen::MatrixXd::Zero(3, 3);
    s.g_matrix(0, 1) = s.g_matrix(1, 0) = dev.g0;
    s.g_matrix(1, 2) = s.g_matrix(2, 1) = dev.g0 * std::sqrt(2.0);
    HilbertSpace space(3, 3);
    GjcModel m = build_gjc(dev, DriveParams(4.9, 0.15), space, &s);
    Liouvillian l = assemble(m);

    std::vector<Complex> ev = dense_spectrum(l);
    const double scale = l.norm_inf();
    int n_zero = 0;
    for (const Complex& z : ev) {
        CHECK(z.real() < 1e-10 * scale);
        if (std::abs(z) < 1e-10 * scale) ++n_zero;
    }
    CHECK(n_zero == 1);
    // real generator on hermitian space: eigenvalues come in conjugate pairs
    for (const Complex& z : ev) {
        if (std::abs(z.imag()) < 1e-10 * scale) continue;
        bool paired = false;
        for (const Complex& w : ev)
            paired |= std::abs(w - std::conj(z)) < 1e-8 * scale;
        CHECK(paired);
    }
}

TEST_CASE("vacuum dominates the steady state of the strongly detuned device") {
    DeviceParams dev;
    dev.omega_c = kTwoPi * 10.423;
    dev.E_J = kTwoPi * 46.7;
    dev.E_C = kTwoPi * 0.221;
    dev.g0 = kTwoPi * 0.295;
    dev.kappa = kTwoPi * 1.432e-3;
    dev.gamma = kTwoPi * 33e-6;
    dev.gamma_phi = kTwoPi * 1e-6;
    HilbertSpace space(4, 3);
    GjcModel m = build_gjc(dev, DriveParams(kTwoPi * 10.476, 0.0), space, nullptr);
    DensityMatrix rho = steady_state(assemble(m));
    CHECK(rho.rho(space.index(0, 0), space.index(0, 0)).real() > 0.95);
}

TEST_CASE("triplet dump and load round-trip") {
    std::mt19937 gen(31);
    DenseMatrix h = random_hermitian(4, gen);
    SparseMatrix c(4, 4);
    c.insert(0, 1) = Complex(0.3, -0.1);
    c.insert(2, 3) = 0.8;
    Liouvillian l = assemble(h.sparseView(), {{"c", c}});

    const std::string path = "liouv_roundtrip.bin";
    dump_triplets(l, path);
    Liouvillian back = load_triplets(path);
    std::remove(path.c_str());

    CHECK(back.dim == l.dim);
    CHECK((DenseMatrix(back.l) - DenseMatrix(l.l)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("memory cap rejects oversized assemblies") {
    SparseMatrix h(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) h.coeffRef(i, j) = 1.0 / (1.0 + i + j);
    CHECK_THROWS(assemble(0.5 * (h + SparseMatrix(h.adjoint())), {}, 64));
}
