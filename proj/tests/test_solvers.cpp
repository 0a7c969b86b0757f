#include <cmath>

#include "doctest.h"

#include "cqed/solvers.hpp"

using namespace cqed;

namespace {

// Driven damped single-mode cavity in the rotating frame:
// H = delta a^dag a + eps (a + a^dag), collapse sqrt(kappa) a.
Liouvillian linear_cavity(int n_fock, double delta, double eps, double kappa,
                          SparseMatrix* a_out = nullptr) {
    SparseMatrix a = fock_annihilator(n_fock);
    SparseMatrix h = delta * fock_number(n_fock) +
                     eps * SparseMatrix(a + SparseMatrix(a.adjoint()));
    std::vector<CollapseChannel> ch{{"decay", SparseMatrix(std::sqrt(kappa) * a)}};
    if (a_out) *a_out = a;
    return assemble(h, ch);
}

Complex coherent_alpha(double delta, double eps, double kappa) {
    return -eps / Complex(delta, -kappa / 2);
}

}  // namespace

TEST_CASE("driven cavity steady state is the closed-form coherent state") {
    SparseMatrix a;
    const double delta = 0.8, eps = 0.25, kappa = 1.1;
    Liouvillian l = linear_cavity(20, delta, eps, kappa, &a);
    DensityMatrix rho = steady_state(l);
    const Complex alpha = (rho.rho * DenseMatrix(a)).trace();
    CHECK(std::abs(alpha - coherent_alpha(delta, eps, kappa)) < 1e-8);
    const double n_bar = (rho.rho * DenseMatrix(fock_number(20))).trace().real();
    CHECK(n_bar == doctest::Approx(std::norm(coherent_alpha(delta, eps, kappa))).epsilon(1e-7));
}

TEST_CASE("undriven lossy cavity relaxes exactly to vacuum") {
    Liouvillian l = linear_cavity(8, 0.4, 0.0, 0.9);
    DensityMatrix rho = steady_state(l);
    CHECK(rho.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.rho.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("slow eigenvalue of the linear cavity is -kappa/2 - i delta") {
    const double delta = 0.6, kappa = 0.33;

    SUBCASE("dense path at small dimension") {
        Liouvillian l = linear_cavity(6, delta, 0.1, kappa);
        SpectralResult r = spectral_gap(l);
        CHECK(r.adr == doctest::Approx(kappa / 2).epsilon(1e-8));
        CHECK(r.t_s == doctest::Approx(2.0 / kappa).epsilon(1e-8));
        CHECK(std::abs(std::abs(r.lambda1.imag()) - delta) < 1e-8);
    }

    SUBCASE("sparse shift-invert path above the dense cutoff") {
        Liouvillian l = linear_cavity(64, delta, 0.1, kappa);
        SpectralOpts opts;
        opts.want_left = false;
        SpectralResult r = spectral_gap(l, opts);
        CHECK(r.adr == doctest::Approx(kappa / 2).epsilon(1e-7));
    }

    SUBCASE("sparse path agrees with the dense spectrum oracle") {
        Liouvillian l = linear_cavity(5, delta, 0.12, kappa);
        SpectralOpts opts;
        opts.dense_cutoff = 0;  // force the Arnoldi path
        opts.want_left = false;
        SpectralResult sparse = spectral_gap(l, opts);
        std::vector<Complex> ev = dense_spectrum(l);
        // slowest nonzero eigenvalue from the full spectrum
        double best = -1e300;
        for (const Complex& z : ev)
            if (std::abs(z) > 1e-9 * l.norm_inf() && z.real() > best) best = z.real();
        CHECK(sparse.lambda1.real() == doctest::Approx(best).epsilon(1e-8));
    }
}

TEST_CASE("pure dephasing two-level gap equals the dephasing rate") {
    const double gphi = 0.07;
    SparseMatrix sz(2, 2);
    sz.insert(0, 0) = 1.0;
    sz.insert(1, 1) = -1.0;
    std::vector<CollapseChannel> ch{{"dephasing", SparseMatrix(std::sqrt(gphi / 2) * sz)}};
    Liouvillian l = assemble(SparseMatrix(2, 2), ch);
    // coherences decay at gamma_phi; both populations are stationary, so the
    // zero eigenvalue is degenerate and deflation must still find the gap
    std::vector<Complex> ev = dense_spectrum(l);
    int n_zero = 0, n_gap = 0;
    for (const Complex& z : ev) {
        if (std::abs(z) < 1e-12) ++n_zero;
        if (std::abs(z + gphi) < 1e-12) ++n_gap;
    }
    CHECK(n_zero == 2);
    CHECK(n_gap == 2);
}

TEST_CASE("left eigenmode is biorthogonal and normalized") {
    Liouvillian l = linear_cavity(10, 0.5, 0.2, 0.6);
    SpectralResult r = spectral_gap(l);
    REQUIRE(r.ell1_left.size() > 0);
    const Complex ip = (r.ell1_left.adjoint() * r.rho1_right).trace();
    CHECK(std::abs(ip - Complex(1.0)) < 1e-8);
    // left mode of lambda1 is orthogonal to the steady state
    const Complex perp = (r.ell1_left.adjoint() * r.rho_ss.rho).trace();
    CHECK(std::abs(perp) < 1e-7);
    CHECK(std::abs((r.rho1_right).trace()) < 1e-8);  // right mode traceless
}

TEST_CASE("transient relaxation follows the closed-form coherent amplitude") {
    SparseMatrix a;
    const double delta = 0.9, eps = 0.3, kappa = 0.7;
    Liouvillian l = linear_cavity(18, delta, eps, kappa, &a);
    const Complex alpha_ss = coherent_alpha(delta, eps, kappa);

    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(80.0 * i / 40.0);
    TransientTrace tr = evolve(l, ground_state(18), grid, a);
    REQUIRE(tr.amp.size() == grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const Complex expect =
            alpha_ss * (1.0 - std::exp(-Complex(kappa / 2, delta) * grid[i]));
        CHECK(std::abs(tr.amp[i] - expect) < 1e-6);
    }
    // long-time limit agrees with the steady-state solver
    CHECK(std::abs(tr.amp.back() - alpha_ss) < 1e-6);
}

TEST_CASE("stiff grids switch to the Krylov propagator and stay accurate") {
    SparseMatrix a;
    const double delta = 400.0, eps = 3.0, kappa = 0.5;
    Liouvillian l = linear_cavity(12, delta, eps, kappa, &a);
    std::vector<double> grid{0.0, 8.0, 16.0, 24.0};
    TransientTrace tr = evolve(l, ground_state(12), grid, a);
    CHECK(tr.integrator == "krylov");
    const Complex alpha_ss = coherent_alpha(delta, eps, kappa);
    for (size_t i = 1; i < grid.size(); ++i) {
        const Complex expect =
            alpha_ss * (1.0 - std::exp(-Complex(kappa / 2, delta) * grid[i]));
        CHECK(std::abs(tr.amp[i] - expect) < 1e-6);
    }
}

TEST_CASE("transmon populations are recorded along the trace") {
    // composite space: lossy transmon starting excited, no cavity dynamics
    HilbertSpace s(2, 2);
    const double gamma = 0.8;
    SparseMatrix b = lowering_transmon(s).mat;
    std::vector<CollapseChannel> ch{{"decay", SparseMatrix(std::sqrt(gamma) * b)}};
    Liouvillian l = assemble(SparseMatrix(4, 4), ch);
    DensityMatrix rho0(DenseMatrix::Zero(4, 4));
    rho0.rho(s.index(0, 1), s.index(0, 1)) = 1.0;
    std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    TransientTrace tr = evolve(l, rho0, grid, annihilator_cavity(s).mat, 2);
    REQUIRE(tr.transmon_pops.size() == grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(tr.transmon_pops[i].size() == 2);
        CHECK(tr.transmon_pops[i][1] ==
              doctest::Approx(std::exp(-gamma * grid[i])).epsilon(1e-6));
        CHECK(tr.transmon_pops[i][0] + tr.transmon_pops[i][1] ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("slowdown fit recovers a synthetic exponential") {
    TransientTrace tr;
    const double tau = 3.7, c0 = 0.42, c1 = 0.55;
    for (int i = 0; i <= 400; ++i) {
        const double t = 30.0 * i / 400.0;
        tr.times.push_back(t);
        tr.amp.push_back(Complex(c0 + c1 * std::exp(-t / tau), 0.0));
    }
    SlowdownFit fit = fit_slowdown(tr, 0.5, 30.0);
    CHECK(!fit.undefined);
    CHECK(!fit.low_confidence);
    CHECK(fit.t_s == doctest::Approx(tau).epsilon(0.01));
    CHECK(fit.offset == doctest::Approx(c0).epsilon(0.01));
    CHECK(fit.amplitude == doctest::Approx(c1).epsilon(0.02));

    // short window relative to the recovered constant flags low confidence
    SlowdownFit shortfit = fit_slowdown(tr, 0.5, 4.0);
    CHECK(shortfit.low_confidence);
}

TEST_CASE("slowdown fit declares flat traces undefined") {
    TransientTrace tr;
    for (int i = 0; i <= 100; ++i) {
        tr.times.push_back(0.1 * i);
        tr.amp.push_back(Complex(0.8, 0.0));
    }
    SlowdownFit fit = fit_slowdown(tr, 0.0, 10.0);
    CHECK(fit.undefined);
}

TEST_CASE("truncation ladder converges on a saturating observable") {
    auto obs = [](const HilbertSpace& s) {
        return 1.0 - std::pow(2.0, -double(s.n_cav)) - std::pow(3.0, -double(s.n_trans));
    };
    ConvergeResult r = converge_truncation(obs, HilbertSpace(8, 2), 1e-6);
    CHECK(r.converged);
    CHECK(r.last_change < 1e-6);
    CHECK(r.history.size() >= 2);

    auto drift = [](const HilbertSpace& s) { return double(s.n_cav); };
    ConvergeResult bad = converge_truncation(drift, HilbertSpace(4, 2), 1e-6, 12, 3);
    CHECK(!bad.converged);
}
