#include "cqed/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqed {

namespace {

constexpr int kChiCap = 64;

double falling(int k, int d) {
    double r = 1.0;
    for (int i = 0; i < d; ++i) r *= double(k - i);
    return r;
}

// Generic series S = sum_chi c_chi * P(m+chi,da) conj(b)^{m+chi-da}
//                            * P(n+chi,db) b^{n+chi-db}
// with c_chi = (-1)^chi/(chi! sqrt(m! n!)). da/db differentiate w.r.t.
// conj(beta) and beta respectively; da=db=0 gives <beta| |m><n| |beta>.
Complex series(int m, int n, Complex beta, int da, int db, int chi_max, double tol) {
    const Complex bc = std::conj(beta);
    Complex sum = 0.0;
    double lead = 0.0;
    int quiet = 0;
    const int cap = std::max(chi_max, kChiCap);
    for (int chi = 0; chi <= cap; ++chi) {
        const int mk = m + chi, nk = n + chi;
        Complex term = 0.0;
        if (mk >= da && nk >= db) {
            term = normal_order_coeff(m, n, chi) * falling(mk, da) * falling(nk, db) *
                   std::pow(bc, mk - da) * std::pow(beta, nk - db);
        }
        sum += term;
        lead = std::max(lead, std::abs(term));
        if (std::abs(term) < tol * std::max(lead, 1e-300))
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 2 && chi >= chi_max) return sum;
    }
    std::ostringstream msg;
    msg << "meanfield series: tail bound " << tol << " not met by depth " << cap
        << " at |beta| = " << std::abs(beta);
    throw std::runtime_error(msg.str());
}

struct Wirtinger {
    Complex fa, fb;           // drift values
    Complex fa_a, fa_ac;      // d f_a / d alpha, d alpha*
    Complex fa_b, fa_bc;
    Complex fb_a, fb_ac;
    Complex fb_b, fb_bc;
};

Wirtinger drift_full(const MeanFieldParams& p, Complex a, Complex b, bool want_jac) {
    const Complex I(0, 1);
    const int nt = p.n_trans();
    auto S = [&](int m, int n, int da, int db) {
        return series(m, n, b, da, db, p.chi_max, p.series_tol);
    };

    Wirtinger w{};
    Complex coupl = 0.0, coupl_b = 0.0, coupl_bc = 0.0;
    Complex qb = 0.0, qb_b = 0.0, qb_bc = 0.0;        // transmon frequency part
    Complex gb = 0.0, gb_b = 0.0, gb_bc = 0.0;        // alpha-weighted couplings
    Complex gbc = 0.0, gbc_b = 0.0, gbc_bc = 0.0;     // alpha*-weighted couplings

    for (int n = 0; n + 1 < nt; ++n) {
        const double g = p.g_n[size_t(n)];
        coupl += g * S(n, n + 1, 0, 0);
        gb += g * S(n + 1, n, 1, 0);
        gbc += g * S(n, n + 1, 1, 0);
        if (want_jac) {
            coupl_b += g * S(n, n + 1, 0, 1);
            coupl_bc += g * S(n, n + 1, 1, 0);
            gb_b += g * S(n + 1, n, 1, 1);
            gb_bc += g * S(n + 1, n, 2, 0);
            gbc_b += g * S(n, n + 1, 1, 1);
            gbc_bc += g * S(n, n + 1, 2, 0);
        }
    }
    for (int n = 0; n < nt; ++n) {
        const double d = p.delta_n[size_t(n)];
        if (d == 0.0) continue;
        qb += d * S(n, n, 1, 0);
        if (want_jac) {
            qb_b += d * S(n, n, 1, 1);
            qb_bc += d * S(n, n, 2, 0);
        }
    }

    w.fa = -I * (p.delta_c * a + p.eps + coupl) - 0.5 * p.kappa * a;
    w.fb = -I * (qb + a * gb + std::conj(a) * gbc) - 0.5 * p.gamma_total * b;
    if (want_jac) {
        w.fa_a = -I * p.delta_c - 0.5 * p.kappa;
        w.fa_ac = 0.0;
        w.fa_b = -I * coupl_b;
        w.fa_bc = -I * coupl_bc;
        w.fb_a = -I * gb;
        w.fb_ac = -I * gbc;
        w.fb_b = -I * (qb_b + a * gb_b + std::conj(a) * gbc_b) - 0.5 * p.gamma_total;
        w.fb_bc = -I * (qb_bc + a * gb_bc + std::conj(a) * gbc_bc);
    }
    return w;
}

// For f with Wirtinger derivatives (p, q) in z: df/dx = p + q, df/dy = i(p - q).
void fill_block(Eigen::Matrix4d& j, int row, int col, Complex p, Complex q) {
    const Complex dx = p + q;
    const Complex dy = Complex(0, 1) * (p - q);
    j(row, col) = dx.real();
    j(row, col + 1) = dy.real();
    j(row + 1, col) = dx.imag();
    j(row + 1, col + 1) = dy.imag();
}

Eigen::Matrix4d real_jacobian(const Wirtinger& w) {
    Eigen::Matrix4d j;
    fill_block(j, 0, 0, w.fa_a, w.fa_ac);
    fill_block(j, 0, 2, w.fa_b, w.fa_bc);
    fill_block(j, 2, 0, w.fb_a, w.fb_ac);
    fill_block(j, 2, 2, w.fb_b, w.fb_bc);
    return j;
}

double freq_scale(const MeanFieldParams& p) {
    double s = std::max({std::abs(p.delta_c), p.kappa, p.gamma_total, p.eps, 1e-300});
    for (double d : p.delta_n) s = std::max(s, std::abs(d));
    for (double g : p.g_n) s = std::max(s, std::abs(g));
    return std::max(s, 1.0);
}

Stability classify(const Eigen::Matrix4d& j, std::array<Complex, 4>& eigs, int n_active) {
    Eigen::EigenSolver<Eigen::Matrix4d> es(j);
    const double thresh = 1e-9 * std::max(1.0, j.cwiseAbs().maxCoeff());
    bool marginal = false, stable = true;
    for (int i = 0; i < 4; ++i) {
        eigs[size_t(i)] = es.eigenvalues()(i);
        if (i >= n_active) continue;
        const double re = es.eigenvalues()(i).real();
        if (std::abs(re) <= thresh) marginal = true;
        if (re >= -thresh) stable = false;
    }
    if (marginal) return Stability::marginal;
    return stable ? Stability::stable : Stability::unstable;
}

}  // namespace

double normal_order_coeff(int m, int n, int chi) {
    if (m < 0 || n < 0 || chi < 0)
        throw std::invalid_argument("normal_order_coeff: negative index");
    double c = 1.0;
    for (int i = 2; i <= chi; ++i) c /= double(i);
    return ((chi % 2) ? -c : c) / std::sqrt(std::tgamma(m + 1.0) * std::tgamma(n + 1.0));
}

Complex coherent_matrix_element(int m, int n, Complex beta, int chi_max, double tol) {
    return series(m, n, beta, 0, 0, chi_max, tol);
}

MeanFieldParams make_gjc_meanfield(const DeviceParams& dev, const DriveParams& drive,
                                   int n_trans, const TransmonSpectrum* spec) {
    TransmonSpectrum local;
    if (!spec) {
        local = diagonalize_transmon(dev.E_J, dev.E_C, n_trans);
        coupling_matrix(local, dev.g0);
        spec = &local;
    }
    if (int(spec->omega_n.size()) < n_trans)
        throw std::invalid_argument("make_gjc_meanfield: spectrum shorter than n_trans");

    MeanFieldParams p;
    p.delta_c = dev.omega_c - drive.omega_d;
    p.eps = drive.eps;
    p.kappa = dev.kappa;
    p.gamma_total = dev.gamma + dev.gamma_phi;
    for (int n = 0; n < n_trans; ++n)
        p.delta_n.push_back(spec->omega_n[size_t(n)] - double(n) * drive.omega_d);
    for (int n = 0; n + 1 < n_trans; ++n) p.g_n.push_back(spec->g_matrix(n, n + 1));
    return p;
}

Drift drift(const MeanFieldParams& p, Complex alpha, Complex beta) {
    const Wirtinger w = drift_full(p, alpha, beta, false);
    return {w.fa, w.fb};
}

Eigen::Matrix4d drift_jacobian(const MeanFieldParams& p, Complex alpha, Complex beta) {
    return real_jacobian(drift_full(p, alpha, beta, true));
}

std::vector<MeanFieldPoint> find_fixed_points(
    const MeanFieldParams& p, const std::vector<std::pair<Complex, Complex>>& seeds_in) {
    std::vector<std::pair<Complex, Complex>> seeds = seeds_in;
    if (seeds.empty()) {
        const double r = 4.0 * p.eps / std::max(p.kappa, 1e-12);
        const Complex lin = -p.eps / Complex(p.delta_c, -0.5 * p.kappa);
        const double dq = (p.n_trans() > 1) ? p.delta_n[1] : 0.0;
        auto add = [&](Complex a) {
            const Complex best =
                (std::abs(dq) > 1e-12 && !p.g_n.empty()) ? -p.g_n[0] * a / dq : Complex(0);
            seeds.emplace_back(a, Complex(0));
            seeds.emplace_back(a, best);
        };
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k < 5; ++k)
                add(Complex(r * (-1.0 + 0.5 * i), r * (-1.0 + 0.5 * k)));
        add(lin);
    }

    const double scale = freq_scale(p);
    std::vector<MeanFieldPoint> roots;
    double best_res = 1e300;
    // known roots divided out of the system (Brown–Gearhart deflation), so
    // Newton is repelled from them and can reach a saddle whose basin of
    // attraction for plain Newton is vanishingly thin
    std::vector<Eigen::Vector4d> deflate;
    auto newton_from = [&](const std::vector<std::pair<Complex, Complex>>& batch) {
        for (const auto& [a0, b0] : batch) {
        Complex a = a0, b = b0;
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            Wirtinger w;
            try {
                w = drift_full(p, a, b, true);
            } catch (const std::exception&) {
                break;  // series radius exceeded at this iterate; abandon seed
            }
            Eigen::Vector4d f(w.fa.real(), w.fa.imag(), w.fb.real(), w.fb.imag());
            const double res = f.cwiseAbs().maxCoeff();
            const double tol = 1e-12 * scale * std::max({1.0, std::abs(a), std::abs(b)});
            best_res = std::min(best_res, res);
            if (res < tol) {
                ok = true;
                break;
            }
            Eigen::Matrix4d j = real_jacobian(w);
            Eigen::Vector4d dx;
            if (deflate.empty()) {
                dx = j.fullPivLu().solve(-f);
            } else {
                const Eigen::Vector4d x(a.real(), a.imag(), b.real(), b.imag());
                double m = 1.0;
                Eigen::Vector4d grad_over_m = Eigen::Vector4d::Zero();
                for (const auto& r : deflate) {
                    const double d2 = std::max((x - r).squaredNorm(), 1e-24);
                    m /= d2;
                    grad_over_m -= 2.0 * (x - r) / d2;
                }
                const Eigen::Matrix4d jd = m * j + (m * f) * grad_over_m.transpose();
                dx = jd.fullPivLu().solve(-m * f);
            }
            if (!dx.allFinite()) break;
            // damp huge steps to keep iterates in the series radius
            const double step = dx.norm();
            const double cap = 2.0 * std::max({1.0, std::abs(a), std::abs(b)});
            if (step > cap) dx *= cap / step;
            a += Complex(dx(0), dx(1));
            b += Complex(dx(2), dx(3));
        }
        if (!ok) continue;
        // the truncated-ladder series only represents the transmon while the
        // coherent state fits inside the retained levels; converged roots with
        // mean excitation beyond the top level are truncation artifacts
        if (std::norm(b) > double(p.n_trans() - 1)) continue;
        bool dup = false;
        for (const auto& rt : roots)
            if (std::abs(rt.alpha - a) + std::abs(rt.beta - b) <
                1e-6 * (1.0 + std::abs(a) + std::abs(b))) {
                dup = true;
                break;
            }
        if (dup) continue;
        MeanFieldPoint pt;
        pt.alpha = a;
        pt.beta = b;
        pt.stable = classify(drift_jacobian(p, a, b), pt.jacobian_eigs, 4);
        roots.push_back(pt);
        }
    };
    newton_from(seeds);

    // a saddle always separates two coexisting attractors: if the scan found
    // two stable roots but no unstable one between them, reseed on the segment
    // joining them (the separatrix crosses it)
    if (count_stable(roots) == 2) {
        MeanFieldPoint s0, s1;
        bool first = true;
        for (const auto& rt : roots) {
            if (rt.stable != Stability::stable) continue;
            (first ? s0 : s1) = rt;
            first = false;
        }
        const double n_lo = std::min(std::norm(s0.alpha), std::norm(s1.alpha));
        const double n_hi = std::max(std::norm(s0.alpha), std::norm(s1.alpha));
        auto has_middle = [&]() {
            for (const auto& rt : roots)
                if (rt.stable == Stability::unstable && std::norm(rt.alpha) > n_lo &&
                    std::norm(rt.alpha) < n_hi)
                    return true;
            return false;
        };
        std::vector<std::pair<Complex, Complex>> extra;
        for (int k = 1; k < 24; ++k) {
            const double t = k / 24.0;
            extra.emplace_back(s0.alpha + t * (s1.alpha - s0.alpha),
                               s0.beta + t * (s1.beta - s0.beta));
        }
        if (!has_middle()) newton_from(extra);
        if (!has_middle()) {
            // repeat with the attractors divided out, which redirects the
            // chord seeds toward the separatrix
            for (const auto& s : {s0, s1})
                deflate.emplace_back(s.alpha.real(), s.alpha.imag(), s.beta.real(),
                                     s.beta.imag());
            newton_from(extra);
            deflate.clear();
        }
        if (!has_middle()) {
            // last resort: the basin boundary is the stable manifold of the
            // saddle, so bisect the chord on basin membership and ride the
            // near-boundary flow to its closest approach to the saddle
            double rot = std::max({std::abs(p.delta_c), p.kappa, p.gamma_total});
            for (double dn : p.delta_n) rot = std::max(rot, std::abs(dn));
            for (double g : p.g_n) rot = std::max(rot, std::abs(g));
            const double dt = 0.8 / std::max(rot, 1e-12);
            const double sep = std::abs(s1.alpha - s0.alpha);
            const long max_steps = 2000000;
            auto rk4 = [&](Complex& a, Complex& b) {
                const Drift f1 = drift(p, a, b);
                const Drift f2 =
                    drift(p, a + 0.5 * dt * f1.d_alpha, b + 0.5 * dt * f1.d_beta);
                const Drift f3 =
                    drift(p, a + 0.5 * dt * f2.d_alpha, b + 0.5 * dt * f2.d_beta);
                const Drift f4 = drift(p, a + dt * f3.d_alpha, b + dt * f3.d_beta);
                a += dt / 6.0 * (f1.d_alpha + 2.0 * f2.d_alpha + 2.0 * f3.d_alpha + f4.d_alpha);
                b += dt / 6.0 * (f1.d_beta + 2.0 * f2.d_beta + 2.0 * f3.d_beta + f4.d_beta);
            };
            auto chord = [&](double t) {
                return std::make_pair(s0.alpha + t * (s1.alpha - s0.alpha),
                                      s0.beta + t * (s1.beta - s0.beta));
            };
            auto basin = [&](double t) -> int {
                auto [a, b] = chord(t);
                for (long it = 0; it < max_steps; ++it) {
                    rk4(a, b);
                    if (std::abs(a - s0.alpha) < 0.04 * sep) return 0;
                    if (std::abs(a - s1.alpha) < 0.04 * sep) return 1;
                }
                return -1;
            };
            try {
                double lo = 0.0, hi = 1.0;
                const int b_lo = basin(0.0), b_hi = basin(1.0);
                if (b_lo == 0 && b_hi == 1) {
                    for (int i = 0; i < 45; ++i) {
                        const double mid = 0.5 * (lo + hi);
                        (basin(mid) == b_lo ? lo : hi) = mid;
                    }
                    auto [a, b] = chord(0.5 * (lo + hi));
                    // the boundary trajectory hovers near the saddle before the
                    // bisection error amplifies and it escapes to an attractor;
                    // fast rotating-frame oscillations keep |f| finite during the
                    // hover and the post-escape attractor approach can reach
                    // smaller |f|, so keep every (thinned) improvement point and
                    // polish each rather than only the global minimum
                    double best = 1e300;
                    std::vector<std::pair<Complex, Complex>> cands;
                    for (long it = 0; it < max_steps; ++it) {
                        rk4(a, b);
                        if (std::abs(a - s0.alpha) < 0.04 * sep ||
                            std::abs(a - s1.alpha) < 0.04 * sep)
                            break;  // captured; the closest saddle approach is behind us
                        if (std::abs(a - s0.alpha) < 0.07 * sep ||
                            std::abs(a - s1.alpha) < 0.07 * sep)
                            continue;
                        const Drift f = drift(p, a, b);
                        const double r = std::max(std::abs(f.d_alpha), std::abs(f.d_beta));
                        if (r < 0.5 * best) {
                            best = r;
                            cands.emplace_back(a, b);
                        }
                    }
                    for (auto c = cands.rbegin(); c != cands.rend() && !has_middle(); ++c)
                        newton_from({*c});
                }
            } catch (const std::exception&) {
                // flow left the series radius; give up on the refinement pass
            }
        }
    }
    if (roots.empty()) {
        std::ostringstream msg;
        msg << "find_fixed_points: no seed converged (best residual " << best_res << ")";
        throw std::runtime_error(msg.str());
    }
    std::sort(roots.begin(), roots.end(), [](const MeanFieldPoint& x, const MeanFieldPoint& y) {
        return std::norm(x.alpha) < std::norm(y.alpha);
    });
    return roots;
}

int count_stable(const std::vector<MeanFieldPoint>& points) {
    int c = 0;
    for (const auto& pt : points)
        if (pt.stable == Stability::stable) ++c;
    return c;
}

std::vector<MeanFieldPoint> kerr_fixed_points(const KerrMeanField& p) {
    std::vector<double> ns;
    const double c0 = p.delta * p.delta + 0.25 * p.kappa * p.kappa;
    if (p.kerr == 0.0) {
        ns.push_back(p.eps * p.eps / std::max(c0, 1e-300));
    } else {
        // K^2 n^3 + 2 delta K n^2 + c0 n - eps^2 = 0, via companion matrix
        const double k2 = p.kerr * p.kerr;
        Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
        comp(1, 0) = 1.0;
        comp(2, 1) = 1.0;
        comp(0, 2) = p.eps * p.eps / k2;
        comp(1, 2) = -c0 / k2;
        comp(2, 2) = -2.0 * p.delta * p.kerr / k2;
        Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
        for (int i = 0; i < 3; ++i) {
            const Complex z = es.eigenvalues()(i);
            if (std::abs(z.imag()) < 1e-9 * (1.0 + std::abs(z.real())) && z.real() > -1e-12)
                ns.push_back(std::max(z.real(), 0.0));
        }
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end(),
                             [](double x, double y) { return std::abs(x - y) < 1e-10 * (1 + y); }),
                 ns.end());
    }

    std::vector<MeanFieldPoint> out;
    for (double n : ns) {
        MeanFieldPoint pt;
        pt.alpha = Complex(0, 1) * p.eps / Complex(-0.5 * p.kappa, -(p.delta + p.kerr * n));
        pt.beta = 0.0;
        const Complex pw = Complex(-0.5 * p.kappa, -(p.delta + 2.0 * p.kerr * n));
        const Complex qw = Complex(0, -1) * p.kerr * pt.alpha * pt.alpha;
        Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
        j(2, 2) = j(3, 3) = -1.0;  // inert spectator block, never inspected
        fill_block(j, 0, 0, pw, qw);
        pt.stable = classify(j, pt.jacobian_eigs, 2);
        out.push_back(pt);
    }
    return out;
}

std::optional<std::pair<double, double>> kerr_bistable_window(double delta, double kerr,
                                                              double kappa) {
    if (kerr == 0.0) return std::nullopt;
    const double disc = delta * delta - 0.75 * kappa * kappa;
    if (disc <= 0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double n1 = (-2.0 * delta - s) / (3.0 * kerr);
    const double n2 = (-2.0 * delta + s) / (3.0 * kerr);
    if (std::min(n1, n2) <= 0) return std::nullopt;
    auto eps2 = [&](double n) {
        const double d = delta + kerr * n;
        return n * (d * d + 0.25 * kappa * kappa);
    };
    const double e1 = std::sqrt(eps2(n1)), e2 = std::sqrt(eps2(n2));
    return std::make_pair(std::min(e1, e2), std::max(e1, e2));
}

BistabilityBoundary trace_boundary(const std::function<int(double, double)>& counter,
                                   const BoundaryGrid& grid, const std::string& model) {
    if (grid.n_omega < 2 || grid.n_eps < 2)
        throw std::invalid_argument("trace_boundary: degenerate grid");
    BistabilityBoundary bd;
    bd.model = model;

    auto bisect = [&](double w, double lo, double hi, int c_lo) {
        while (hi - lo > grid.eps_rel_tol * std::max(hi, 1e-300)) {
            const double mid = 0.5 * (lo + hi);
            if (counter(w, mid) == c_lo)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    for (int i = 0; i < grid.n_omega; ++i) {
        const double w = grid.omega_lo +
                         (grid.omega_hi - grid.omega_lo) * double(i) / double(grid.n_omega - 1);
        int prev = -1;
        double prev_eps = 0.0;
        bool have_lower = false;
        for (int k = 0; k < grid.n_eps; ++k) {
            const double e =
                grid.eps_lo + (grid.eps_hi - grid.eps_lo) * double(k) / double(grid.n_eps - 1);
            int c;
            try {
                c = counter(w, e);
            } catch (const std::exception&) {
                prev = -1;
                continue;
            }
            if (prev >= 0 && c != prev) {
                const double edge = bisect(w, prev_eps, e, prev);
                if (c > prev && !have_lower) {
                    bd.lower.push_back({w, edge});
                    have_lower = true;
                } else if (c < prev) {
                    bd.upper.push_back({w, edge});
                }
            }
            prev = c;
            prev_eps = e;
        }
    }
    if (!bd.lower.empty()) {
        bd.empty = false;
        auto it = std::min_element(bd.lower.begin(), bd.lower.end(),
                                   [](const BoundaryPoint& x, const BoundaryPoint& y) {
                                       return x.eps < y.eps;
                                   });
        bd.onset_eps = it->eps;
        bd.onset_omega_d = it->omega_d;
    }
    return bd;
}

BistabilityBoundary trace_boundary_gjc(const DeviceParams& dev, int n_trans,
                                       const BoundaryGrid& grid,
                                       const TransmonSpectrum* spec) {
    TransmonSpectrum local;
    if (!spec) {
        local = diagonalize_transmon(dev.E_J, dev.E_C, n_trans);
        coupling_matrix(local, dev.g0);
        spec = &local;
    }
    auto counter = [&dev, n_trans, spec](double w, double e) {
        MeanFieldParams p = make_gjc_meanfield(dev, DriveParams(w, e), n_trans, spec);
        return count_stable(find_fixed_points(p));
    };
    return trace_boundary(counter, grid, "gjc");
}

BistabilityBoundary trace_boundary_duffing(const DuffingParams& dp, const BoundaryGrid& grid) {
    auto counter = [&dp](double w, double e) {
        KerrMeanField k{dp.omega_tilde_c - w, dp.kerr, dp.kappa_tilde,
                        dp.eps_tilde_ratio * e};
        return count_stable(kerr_fixed_points(k));
    };
    return trace_boundary(counter, grid, "duffing");
}

PowerCalibration calibrate_onset(const DeviceParams& dev, int n_trans,
                                 const BoundaryGrid& grid, double p_ref_dbm,
                                 const TransmonSpectrum* spec) {
    BistabilityBoundary bd = trace_boundary_gjc(dev, n_trans, grid, spec);
    if (bd.empty)
        throw std::runtime_error("calibrate_onset: no bistable region in the scanned window");
    return PowerCalibration{bd.onset_eps, p_ref_dbm};
}

PowerCalibration default_calibration(const DeviceParams& dev, int n_trans,
                                     double p_ref_dbm) {
    const DuffingParams dp = project_duffing(dressed_ladder(dev, 4), dev);
    if (dp.kerr >= 0 || dp.kappa_tilde <= 0)
        throw std::runtime_error("default_calibration: device not in the soft-Kerr regime");
    // Kerr-oscillator onset: detuning sqrt(3) kappa/2 below the dressed line
    const double d_on = std::sqrt(3.0) * dp.kappa_tilde / 2.0;
    const double n_on = -2.0 * d_on / (3.0 * dp.kerr);
    const double dd = d_on + dp.kerr * n_on;
    const double eps_on =
        std::sqrt(n_on * (dd * dd + 0.25 * dp.kappa_tilde * dp.kappa_tilde)) /
        std::max(dp.eps_tilde_ratio, 1e-6);

    BoundaryGrid grid;
    grid.omega_lo = dp.omega_tilde_c - 30.0 * dp.kappa_tilde;
    grid.omega_hi = dp.omega_tilde_c + 2.0 * dp.kappa_tilde;
    grid.eps_lo = 0.2 * eps_on;
    grid.eps_hi = 8.0 * eps_on;
    grid.n_omega = 60;
    grid.n_eps = 60;
    return calibrate_onset(dev, n_trans, grid, p_ref_dbm);
}

BranchSweep branch_occupations(
    const std::function<std::vector<MeanFieldPoint>(double)>& builder,
    const std::vector<double>& eps_values) {
    BranchSweep sweep;
    double prev_bright = -1.0, prev_dim = -1.0;
    for (size_t i = 0; i < eps_values.size(); ++i) {
        const double e = eps_values[i];
        std::vector<MeanFieldPoint> stable;
        for (const auto& pt : builder(e))
            if (pt.stable == Stability::stable) stable.push_back(pt);
        std::sort(stable.begin(), stable.end(),
                  [](const MeanFieldPoint& x, const MeanFieldPoint& y) {
                      return std::norm(x.alpha) < std::norm(y.alpha);
                  });

        BranchPoint b{e, 0, 0, false}, d{e, 0, 0, false};
        if (stable.size() >= 2) {
            const auto& hi = stable.back();
            const auto& lo = stable.front();
            b = {e, std::norm(hi.alpha), std::norm(hi.beta), true};
            d = {e, std::norm(lo.alpha), std::norm(lo.beta), true};
        } else if (stable.size() == 1) {
            const double n = std::norm(stable[0].alpha);
            const bool to_bright =
                prev_dim < 0 || (prev_bright >= 0 &&
                                 std::abs(n - prev_bright) <= std::abs(n - prev_dim));
            if (to_bright)
                b = {e, n, std::norm(stable[0].beta), true};
            else
                d = {e, n, std::norm(stable[0].beta), true};
        }
        auto jumped = [](double prev, const BranchPoint& cur) {
            return prev > 0 && cur.present &&
                   (cur.n_cavity > 3.0 * prev || cur.n_cavity < prev / 3.0);
        };
        if (jumped(prev_bright, b) || jumped(prev_dim, d)) sweep.reseeded.push_back(int(i));
        if (b.present) prev_bright = b.n_cavity;
        if (d.present) prev_dim = d.n_cavity;
        sweep.bright.push_back(b);
        sweep.dim.push_back(d);
    }
    return sweep;
}

}  // namespace cqed
