#include <cmath>

#include "doctest.h"

#include "cqed/duffing.hpp"
#include "cqed/meanfield.hpp"
#include "cqed/rates.hpp"

using namespace cqed;

namespace {

// Two-state classical jump process embedded as a Lindblad system, with a
// strong dephasing channel so the population mode is the slowest one.
Liouvillian classical_two_state(double gamma_bd, double gamma_db) {
    SparseMatrix jump_bd(2, 2), jump_db(2, 2), sz(2, 2);
    jump_bd.insert(1, 0) = std::sqrt(gamma_bd);  // bright |0> -> dim |1>
    jump_db.insert(0, 1) = std::sqrt(gamma_db);
    sz.insert(0, 0) = std::sqrt(10.0 * (gamma_bd + gamma_db));
    sz.insert(1, 1) = -std::sqrt(10.0 * (gamma_bd + gamma_db));
    return assemble(SparseMatrix(2, 2),
                    {{"bd", jump_bd}, {"db", jump_db}, {"deph", sz}});
}

// a-like operator whose expectation separates the two classical states.
SparseMatrix bright_marker() {
    SparseMatrix a(2, 2);
    a.insert(0, 0) = 2.0;
    return a;
}

}  // namespace

TEST_CASE("occupancy evolution matches an independent ODE integration") {
    SwitchingRates r{0.31, 0.12};
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(1.2 * i);
    OccupancyTrace tr = occupancy_evolution(r, 0.9, grid);
    REQUIRE(tr.p_b.size() == grid.size());

    // RK4 on p_b' = -gamma_bd p_b + gamma_db (1 - p_b), stepping exactly
    // from grid point to grid point so the comparison times coincide
    auto f = [&](double p) { return -r.gamma_bd * p + r.gamma_db * (1.0 - p); };
    double p = 0.9;
    CHECK(std::abs(tr.p_b[0] - p) < 1e-10);
    for (size_t idx = 1; idx < grid.size(); ++idx) {
        const int sub = 2048;
        const double dt = (grid[idx] - grid[idx - 1]) / sub;
        for (int s = 0; s < sub; ++s) {
            const double k1 = f(p), k2 = f(p + dt / 2 * k1), k3 = f(p + dt / 2 * k2),
                         k4 = f(p + dt * k3);
            p += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        CHECK(std::abs(tr.p_b[idx] - p) < 1e-10);
        CHECK(tr.p_b[idx] + tr.p_d[idx] == doctest::Approx(1.0).epsilon(1e-12));
    }
    // long-time equilibrium
    CHECK(tr.p_b.back() ==
          doctest::Approx(r.gamma_db / (r.gamma_bd + r.gamma_db)).epsilon(1e-6));
}

TEST_CASE("occupancy evolution validates its inputs") {
    CHECK_THROWS(occupancy_evolution({0.1, 0.1}, -0.2, {0.0, 1.0}));
    CHECK_THROWS(occupancy_evolution({0.1, 0.1}, 1.2, {0.0, 1.0}));
    CHECK_THROWS(occupancy_evolution({-0.1, 0.1}, 0.5, {0.0, 1.0}));
}

TEST_CASE("rates are recovered from the embedded classical process") {
    const double gbd = 0.23, gdb = 0.08;
    Liouvillian l = classical_two_state(gbd, gdb);
    SpectralResult sr = spectral_gap(l);
    CHECK(sr.adr == doctest::Approx(gbd + gdb).epsilon(1e-8));

    auto [rates, split] = extract_rates(sr, bright_marker());
    CHECK(rates.gamma_bd == doctest::Approx(gbd).epsilon(1e-6));
    CHECK(rates.gamma_db == doctest::Approx(gdb).epsilon(1e-6));
    CHECK(rates.t_s() == doctest::Approx(1.0 / (gbd + gdb)).epsilon(1e-6));
    CHECK(rates.gamma_bd + rates.gamma_db == doctest::Approx(sr.adr).epsilon(1e-9));

    CHECK(split.p_b_ss == doctest::Approx(gdb / (gbd + gdb)).epsilon(1e-6));
    CHECK(split.p_b_ss + split.p_d_ss == doctest::Approx(1.0).epsilon(1e-9));
    // metastable states are the classical basis states
    CHECK(std::abs(split.rho_bright.rho(0, 0) - Complex(1.0)) < 1e-6);
    CHECK(std::abs(split.rho_dim.rho(1, 1) - Complex(1.0)) < 1e-6);
    CHECK(split.rho_bright.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(split.rho_dim.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("symmetric switching gives equal occupancies") {
    Liouvillian l = classical_two_state(0.17, 0.17);
    auto [rates, split] = extract_rates(spectral_gap(l), bright_marker());
    CHECK(split.p_b_ss == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rates.gamma_bd == doctest::Approx(rates.gamma_db).epsilon(1e-6));
}

TEST_CASE("rate extraction requires the left slow mode") {
    Liouvillian l = classical_two_state(0.2, 0.1);
    SpectralOpts opts;
    opts.want_left = false;
    SpectralResult sr = spectral_gap(l, opts);
    CHECK_THROWS(extract_rates(sr, bright_marker()));
}

TEST_CASE("metastable split of a bistable Kerr oscillator") {
    DuffingParams p;
    p.omega_tilde_c = 6.0;
    p.kerr = -0.004;
    p.r_a = p.eps_tilde_ratio = 1.0;
    p.kappa_tilde = 0.002;
    auto win = kerr_bistable_window(0.02, p.kerr, p.kappa_tilde);
    REQUIRE(win.has_value());
    // deep in the window, where the slow mode separates strongly from the
    // fast spectrum and the two-state reduction is clean
    const double eps = win->first * std::pow(win->second / win->first, 0.75);
    DuffingModel m = build_duffing(p, DriveParams(6.0 - 0.02, eps), 24);
    Liouvillian l = assemble(m);
    SpectralResult sr = spectral_gap(l);
    auto [rates, split] = extract_rates(sr, fock_annihilator(24));

    CHECK(rates.gamma_bd + rates.gamma_db == doctest::Approx(sr.adr).epsilon(1e-8));
    CHECK(split.p_b_ss > 0.0);
    CHECK(split.p_d_ss > 0.0);
    CHECK(split.p_b_ss + split.p_d_ss == doctest::Approx(1.0).epsilon(1e-8));

    const DenseMatrix num = DenseMatrix(fock_number(24));
    const double n_bright = (split.rho_bright.rho * num).trace().real();
    const double n_dim = (split.rho_dim.rho * num).trace().real();
    CHECK(n_bright > n_dim);
    // metastable states are positive up to O(lambda1/lambda2) corrections
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eb(split.rho_bright.rho, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> ed(split.rho_dim.rho, Eigen::EigenvaluesOnly);
    CHECK(eb.eigenvalues().minCoeff() > -1e-2);
    CHECK(ed.eigenvalues().minCoeff() > -1e-2);
}
