#include <cmath>

#include "doctest.h"

#include "cqed/transmon.hpp"

using namespace cqed;

// Angular units of 2pi GHz throughout this file: a value x means x GHz / 2pi.
namespace {
constexpr double kEj = kTwoPi * 46.7;
constexpr double kEc = kTwoPi * 0.221;
constexpr double kWc = kTwoPi * 10.423;
constexpr double kG0 = kTwoPi * 0.295;
}  // namespace

TEST_CASE("qubit frequency near the asymptotic transmon formula") {
    TransmonSpectrum s = diagonalize_transmon(kEj, kEc, 4);
    const double w01 = s.omega_n[1];
    const double asym = std::sqrt(8.0 * kEj * kEc) - kEc;  // 2pi * 8.866 GHz
    CHECK(std::abs(w01 - asym) / asym < 0.02);
    CHECK(s.omega_n[0] == 0.0);
    for (size_t n = 1; n < s.omega_n.size(); ++n) CHECK(s.omega_n[n] > s.omega_n[n - 1]);
}

TEST_CASE("anharmonicity is negative and close to -E_C") {
    TransmonSpectrum s = diagonalize_transmon(kEj, kEc, 4);
    const double anh = (s.omega_n[2] - s.omega_n[1]) - s.omega_n[1];
    CHECK(anh < 0.0);
    CHECK(std::abs(anh + kEc) / kEc < 0.15);
}

TEST_CASE("harmonic limit at vanishing charging energy") {
    // plasma frequency sqrt(8 E_J E_C) fixed at 1 while E_C -> 0: the level
    // spacings become uniform, with nonuniformity shrinking like E_C
    auto spread = [](double ec, int cutoff) {
        TransmonSpectrum s = diagonalize_transmon(1.0 / (8.0 * ec), ec, 4, cutoff);
        const double d0 = s.omega_n[1];
        double worst = 0.0;
        for (size_t n = 1; n < 3; ++n)
            worst = std::max(worst, std::abs(s.omega_n[n + 1] - s.omega_n[n] - d0) / d0);
        return worst;
    };
    const double coarse = spread(1e-3, 80);
    const double fine = spread(1e-4, 200);
    CHECK(coarse < 5e-3);
    CHECK(fine < 0.15 * coarse);  // first-order in E_C
}

TEST_CASE("coupling matrix normalization and structure") {
    TransmonSpectrum s = diagonalize_transmon(kEj, kEc, 5);
    coupling_matrix(s, kG0);
    CHECK(s.g_matrix(0, 1) == doctest::Approx(kG0));
    const double ratio = std::abs(s.g_matrix(1, 2) / s.g_matrix(0, 1));
    CHECK(ratio > 1.0);
    CHECK(ratio < 1.6);
    CHECK(std::abs(s.g_matrix(0, 3)) / kG0 < 0.05);
    // real symmetric under the positive phase convention
    CHECK((s.g_matrix - s.g_matrix.transpose()).cwiseAbs().maxCoeff() < 1e-9 * kG0);
}

TEST_CASE("detunings against the quoted device value") {
    TransmonSpectrum s = diagonalize_transmon(kEj, kEc, 5);
    coupling_matrix(s, kG0);
    std::vector<double> d = detunings(s, kWc);
    // quoted -1.572 GHz; diagonalization lands within 25 MHz of it
    CHECK(std::abs(d[0] - kTwoPi * (-1.572)) < kTwoPi * 0.025);
    CHECK(std::abs(kG0 / d[0]) == doctest::Approx(0.19).epsilon(0.12));
}

TEST_CASE("equal level spacing at the cavity frequency gives zero detuning") {
    TransmonSpectrum s;
    s.omega_n = {0.0, 2.0, 4.0, 6.0};
    s.g_matrix = Eigen::MatrixXd::Zero(4, 4);
    std::vector<double> d = detunings(s, 2.0);
    for (double x : d) CHECK(x == doctest::Approx(0.0));
}

TEST_CASE("charge-cutoff and gate-charge insensitivity") {
    // SI rad/s here so the absolute thresholds (1 Hz, 1 kHz) are meaningful
    const double ej = kTwoPi * 46.7e9, ec = kTwoPi * 221e6;
    TransmonSpectrum a = diagonalize_transmon(ej, ec, 4, 20);
    TransmonSpectrum b = diagonalize_transmon(ej, ec, 4, 40);
    for (size_t n = 0; n < a.omega_n.size(); ++n)
        CHECK(std::abs(a.omega_n[n] - b.omega_n[n]) < kTwoPi * 1.0);

    TransmonSpectrum c = diagonalize_transmon(ej, ec, 4, 20, 0.5);
    for (size_t n = 0; n < a.omega_n.size(); ++n)
        CHECK(std::abs(a.omega_n[n] - c.omega_n[n]) < kTwoPi * 1e3);
}

TEST_CASE("device parameter validation") {
    DeviceParams dev;
    dev.omega_c = kWc;
    dev.E_J = kEj;
    dev.E_C = kEc;
    dev.kappa = 0.001;
    CHECK(dev.validate().empty());

    DeviceParams bad = dev;
    bad.kappa = -1.0;
    CHECK_THROWS(bad.validate());
    bad = dev;
    bad.n_c = 1.5;
    CHECK_THROWS(bad.validate());
    bad = dev;
    bad.E_J = kEc * 5;  // E_J/E_C = 5: outside the transmon regime, warns
    CHECK(!bad.validate().empty());
}
