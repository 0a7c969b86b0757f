#include "cqed/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

namespace cqed {

namespace {

using Factorization = Eigen::SparseLU<SparseMatrix>;

DenseVector trace_functional(int d) {
    DenseVector u = DenseVector::Zero(Eigen::Index(d) * d);
    for (int k = 0; k < d; ++k) u(Eigen::Index(k) * d + k) = 1.0;
    return u;
}

// Deterministic start vector for the Arnoldi iterations.
DenseVector seeded_vector(Eigen::Index n) {
    std::mt19937 gen(0x5eed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(dist(gen), dist(gen));
    return v;
}

struct RitzPair {
    Complex lambda;
    DenseVector vec;
    double residual;
};

// Arnoldi on op() with a rank-1 deflation projector P v = v - dir (codir . v).
// Returns Ritz pairs of the *transformed* operator mapped back through
// lambda = sigma + 1/mu, sorted by descending Re(lambda).
std::vector<RitzPair> shift_invert_arnoldi(
    const std::function<DenseVector(const DenseVector&)>& op, Eigen::Index n,
    const DenseVector& defl_dir, const DenseVector& defl_codir, Complex sigma,
    int ncv, int max_restarts, double abs_tol, double lambda_max) {
    auto project = [&](DenseVector& v) {
        v -= defl_dir * defl_codir.dot(v);
    };

    DenseVector start = seeded_vector(n);
    project(start);

    std::vector<RitzPair> result;
    for (int restart = 0; restart < max_restarts; ++restart) {
        const int m = std::min<Eigen::Index>(ncv, n);
        DenseMatrix v(n, m + 1);
        DenseMatrix h = DenseMatrix::Zero(m + 1, m);
        v.col(0) = start / start.norm();
        int built = m;
        bool broke_down = false;
        for (int j = 0; j < m; ++j) {
            DenseVector w = op(v.col(j));
            project(w);
            const double w_scale = std::max(w.norm(), 1e-300);
            for (int i = 0; i <= j; ++i) {
                h(i, j) = v.col(i).dot(w);
                w -= h(i, j) * v.col(i);
            }
            // one step of reorthogonalization
            for (int i = 0; i <= j; ++i) {
                const Complex c = v.col(i).dot(w);
                h(i, j) += c;
                w -= c * v.col(i);
            }
            h(j + 1, j) = w.norm();
            // breakdown: the Krylov space is (numerically) invariant
            if (std::abs(h(j + 1, j)) < 1e-12 * w_scale) {
                built = j + 1;
                broke_down = true;
                break;
            }
            v.col(j + 1) = w / h(j + 1, j);
        }

        Eigen::ComplexEigenSolver<DenseMatrix> es(h.topLeftCorner(built, built));
        if (es.info() != Eigen::Success)
            throw std::runtime_error("spectral_gap: Hessenberg eigensolve failed");

        std::vector<int> order(built);
        for (int i = 0; i < built; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
        });

        result.clear();
        for (int rank = 0; rank < built; ++rank) {
            const int i = order[rank];
            const Complex mu = es.eigenvalues()(i);
            if (std::abs(mu) < 1e-300) continue;
            // a Ritz value far outside the spectral-radius bound is an
            // artifact of the breakdown column, not an eigenvalue
            if (std::abs(sigma + 1.0 / mu) > lambda_max) continue;
            DenseVector y = es.eigenvectors().col(i);
            DenseVector x = v.leftCols(built) * y;
            const double res =
                broke_down ? 0.0 : std::abs(h(built, built - 1)) * std::abs(y(built - 1));
            const Complex lambda = sigma + 1.0 / mu;
            // residual of the transformed problem scaled back to L-units
            const double res_lambda = res / std::abs(mu) * std::abs(lambda - sigma);
            result.push_back({lambda, x / x.norm(), res_lambda});
        }
        std::sort(result.begin(), result.end(), [](const RitzPair& a, const RitzPair& b) {
            return a.lambda.real() > b.lambda.real();
        });
        // the caller reports the largest-real-part pairs, so convergence must
        // be demanded of those, not of the pair closest to the shift
        bool leading_converged = !result.empty();
        for (size_t i = 0; i < result.size() && i < 2; ++i)
            leading_converged &= result[i].residual < abs_tol;
        if (leading_converged) return result;
        // restart from the dominant Ritz vector
        if (!result.empty()) {
            start = result.front().vec;
            for (size_t i = 1; i < result.size() && i < 3; ++i) start += 0.1 * result[i].vec;
            project(start);
        }
    }
    throw std::runtime_error("spectral_gap: Arnoldi failed to converge after max restarts");
}

}  // namespace

DensityMatrix steady_state(const Liouvillian& liouv, const SteadyStateOpts& opts) {
    const int d = liouv.dim;
    const Eigen::Index n = Eigen::Index(d) * d;

    // Replace the first row of L by the trace functional tr(rho) = 1.
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(size_t(liouv.l.nonZeros()) + size_t(d));
    for (int k = 0; k < liouv.l.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(liouv.l, k); it; ++it)
            if (it.row() != 0) t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int k = 0; k < d; ++k) t.emplace_back(0, k * d + k, 1.0);
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();

    Factorization lu(a);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("steady_state: sparse factorization failed");
    DenseVector rhs = DenseVector::Zero(n);
    rhs(0) = 1.0;
    DenseVector x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("steady_state: solve failed");

    DensityMatrix rho(unvectorize(x, d));
    rho.hermitize_and_normalize();

    const DenseVector vr = vectorize(rho.rho);
    const double residual = (liouv.l * vr).cwiseAbs().maxCoeff();
    const double scale = liouv.norm_inf() * vr.cwiseAbs().maxCoeff();
    if (residual > opts.residual_tol * scale) {
        std::ostringstream msg;
        msg << "steady_state: residual " << residual << " exceeds " << opts.residual_tol
            << " * " << scale << " (singular beyond deflation?)";
        throw std::runtime_error(msg.str());
    }
    return rho;
}

std::vector<Complex> dense_spectrum(const Liouvillian& liouv) {
    Eigen::ComplexEigenSolver<DenseMatrix> es(DenseMatrix(liouv.l), false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_spectrum: eigensolver failed");
    std::vector<Complex> vals(es.eigenvalues().data(),
                              es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(vals.begin(), vals.end(),
              [](Complex a, Complex b) { return a.real() > b.real(); });
    return vals;
}

namespace {

SpectralResult dense_gap(const Liouvillian& liouv, const SpectralOpts& opts) {
    const int d = liouv.dim;
    Eigen::ComplexEigenSolver<DenseMatrix> es{DenseMatrix(liouv.l), true};
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_gap: dense eigensolver failed");
    const double lnorm = std::max(liouv.norm_inf(), 1e-300);

    std::vector<int> order(es.eigenvalues().size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
    });

    SpectralResult res;
    int i_zero = -1, i_slow = -1, i_next = -1;
    for (int i : order) {
        const Complex lam = es.eigenvalues()(i);
        if (i_zero < 0 && std::abs(lam) < 1e-9 * lnorm) {
            i_zero = i;
        } else if (i_slow < 0) {
            i_slow = i;
        } else if (i_next < 0) {
            i_next = i;
            break;
        }
    }
    if (i_zero < 0 || i_slow < 0)
        throw std::runtime_error("spectral_gap: could not separate zero mode (dense)");

    DensityMatrix rho_ss(unvectorize(es.eigenvectors().col(i_zero), d));
    rho_ss.hermitize_and_normalize();
    res.rho_ss = rho_ss;
    res.lambda1 = es.eigenvalues()(i_slow);
    res.lambda2 = (i_next >= 0) ? es.eigenvalues()(i_next) : Complex(0);
    res.adr = -res.lambda1.real();
    res.t_s = 1.0 / res.adr;
    res.rho1_right = unvectorize(es.eigenvectors().col(i_slow), d);
    if (std::abs(res.lambda1.imag()) < 1e-9 * lnorm)
        res.rho1_right = 0.5 * (res.rho1_right + res.rho1_right.adjoint()).eval();
    res.rho1_right /= res.rho1_right.norm();

    if (opts.want_left) {
        Eigen::ComplexEigenSolver<DenseMatrix> esl{DenseMatrix(liouv.l).adjoint().eval(), true};
        int best = -1;
        double dist = 1e300;
        for (Eigen::Index i = 0; i < esl.eigenvalues().size(); ++i) {
            const double dd = std::abs(esl.eigenvalues()(i) - std::conj(res.lambda1));
            if (dd < dist) {
                dist = dd;
                best = int(i);
            }
        }
        res.ell1_left = unvectorize(esl.eigenvectors().col(best), d);
        const Complex ip = vectorize(res.ell1_left).dot(vectorize(res.rho1_right));
        res.ell1_left /= std::conj(ip);
    }
    return res;
}

}  // namespace

SpectralResult spectral_gap(const Liouvillian& liouv, const SpectralOpts& opts) {
    const int d = liouv.dim;
    const Eigen::Index n = Eigen::Index(d) * d;
    const double lnorm = std::max(liouv.norm_inf(), 1e-300);

    SpectralResult res;
    try {
        const Complex sigma(opts.sigma_rel * lnorm, 0.0);
        SparseMatrix shifted = liouv.l;
        for (int k = 0; k < int(n); ++k) shifted.coeffRef(k, k) -= sigma;
        shifted.makeCompressed();
        Factorization lu(shifted);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("spectral_gap: shifted factorization failed");

        // Steady state by inverse iteration on the shifted factorization:
        // sigma sits ~|lambda1/sigma| times closer to 0 than to any other
        // eigenvalue, so a few solves isolate the zero mode.
        {
            DenseVector v = vectorize(DenseMatrix(
                DenseMatrix::Identity(d, d) / double(d)));
            bool ok = false;
            double best_rel = 1e300;
            DensityMatrix best_cand;
            for (int it = 0; it < 12; ++it) {
                v = lu.solve(v);
                DensityMatrix cand(unvectorize(v, d));
                cand.hermitize_and_normalize();
                v = vectorize(cand.rho);
                const double rel = (liouv.l * v).cwiseAbs().maxCoeff() /
                                   (lnorm * v.cwiseAbs().maxCoeff());
                if (rel < best_rel) {
                    best_rel = rel;
                    best_cand = cand;
                }
                if (rel < 1e-13) {
                    ok = true;
                    break;
                }
            }
            if (ok || best_rel < 1e-10)
                res.rho_ss = best_cand;
            else
                res.rho_ss = steady_state(liouv);  // robust direct fallback
        }
        DenseVector v0 = vectorize(res.rho_ss.rho);
        v0 /= v0.norm();
        DenseVector u0 = trace_functional(d);
        u0 /= u0.norm();
        const Complex overlap = u0.dot(v0);
        if (std::abs(overlap) < 1e-12)
            throw std::runtime_error("spectral_gap: degenerate deflation geometry");
        // P v = v - v0 (u0.v)/(u0.v0): spectral projector complement of the zero mode
        DenseVector defl_dir = v0 / overlap;

        auto op = [&](const DenseVector& v) -> DenseVector { return lu.solve(v); };
        auto pairs = shift_invert_arnoldi(op, n, defl_dir, u0, sigma, opts.ncv,
                                          opts.max_restarts, opts.tol * lnorm, 2.0 * lnorm);

        // discard any zero-mode remnant
        std::vector<RitzPair> clean;
        for (auto& p : pairs)
            if (std::abs(p.lambda) > 1e-11 * lnorm) clean.push_back(p);
        if (clean.empty()) throw std::runtime_error("spectral_gap: only the zero mode found");

        // Rayleigh-quotient refinement in the original space: Ritz values of
        // the inverted operator carry machine noise at scale 1/sigma whenever
        // an undeflated (near-)degenerate zero mode inflates the Hessenberg.
        // Only accepted when it is a small correction, so an unconverged
        // vector cannot replace its Ritz value with a field-of-values point.
        for (auto& p : clean) {
            const DenseVector& x = p.vec;
            const Complex rq = x.dot(liouv.l * x) / x.squaredNorm();
            if (std::abs(rq - p.lambda) < 1e-3 * std::abs(p.lambda) + 1e-12 * lnorm)
                p.lambda = rq;
        }
        res.lambda1 = clean[0].lambda;
        res.lambda2 = clean.size() > 1 ? clean[1].lambda : Complex(0);
        res.adr = -res.lambda1.real();
        res.t_s = 1.0 / res.adr;
        res.rho1_right = unvectorize(clean[0].vec, d);
        if (std::abs(res.lambda1.imag()) < 1e-9 * lnorm)
            res.rho1_right = 0.5 * (res.rho1_right + res.rho1_right.adjoint()).eval();
        res.rho1_right /= res.rho1_right.norm();

        if (opts.want_left) {
            SparseMatrix shifted_adj = SparseMatrix(shifted.adjoint());
            Factorization lua(shifted_adj);
            if (lua.info() != Eigen::Success)
                throw std::runtime_error("spectral_gap: adjoint factorization failed");
            auto opa = [&](const DenseVector& v) -> DenseVector { return lua.solve(v); };
            DenseVector defl_dir_a = u0 / std::conj(overlap);
            auto lpairs = shift_invert_arnoldi(opa, n, defl_dir_a, v0, std::conj(sigma),
                                               opts.ncv, opts.max_restarts, opts.tol * lnorm,
                                               2.0 * lnorm);
            int best = -1;
            double dist = 1e300;
            for (size_t i = 0; i < lpairs.size(); ++i) {
                const double dd = std::abs(lpairs[i].lambda - std::conj(res.lambda1));
                if (dd < dist) {
                    dist = dd;
                    best = int(i);
                }
            }
            res.ell1_left = unvectorize(lpairs[best].vec, d);
            const Complex ip = vectorize(res.ell1_left).dot(vectorize(res.rho1_right));
            res.ell1_left /= std::conj(ip);
        }
    } catch (const std::exception& e) {
        if (d <= opts.dense_cutoff) {
            res = dense_gap(liouv, opts);
            res.warnings.push_back(std::string("sparse path failed, dense fallback used: ") +
                                   e.what());
        } else {
            throw;
        }
    }

    if (res.adr <= 0)
        throw std::runtime_error("spectral_gap: nonpositive decay rate (spectrum anomaly)");
    if (res.adr < 1e-12 * lnorm)
        res.warnings.push_back("gap below 1e-12 * ||L||: result may be conditioning-limited");
    return res;
}

// ---------------------------------------------------------------------------
// time evolution

namespace {

// Krylov approximation of exp(t L) v with adaptive substepping.
DenseVector krylov_expv(const SparseMatrix& l, DenseVector v, double t, int m, double tol) {
    double remaining = t;
    double tau = t;
    while (remaining > 0) {
        const double beta = v.norm();
        if (beta < 1e-300) return v;
        const Eigen::Index n = v.size();
        const int mm = int(std::min<Eigen::Index>(m, n));
        DenseMatrix vs(n, mm + 1);
        DenseMatrix h = DenseMatrix::Zero(mm + 1, mm);
        vs.col(0) = v / beta;
        int built = mm;
        bool breakdown = false;
        for (int j = 0; j < mm; ++j) {
            DenseVector w = l * vs.col(j);
            for (int i = 0; i <= j; ++i) {
                h(i, j) = vs.col(i).dot(w);
                w -= h(i, j) * vs.col(i);
            }
            h(j + 1, j) = w.norm();
            if (std::abs(h(j + 1, j)) < 1e-14 * beta) {
                built = j + 1;
                breakdown = true;
                break;
            }
            vs.col(j + 1) = w / h(j + 1, j);
        }
        tau = std::min(tau, remaining);
        for (;;) {
            DenseMatrix f = (tau * h.topLeftCorner(built, built)).exp();
            double err = breakdown ? 0.0
                                   : beta * std::abs(h(built, built - 1)) *
                                         std::abs(f(built - 1, 0)) * tau;
            if (err <= tol * std::max(1.0, beta) || tau < 1e-18 * t) {
                v = beta * (vs.leftCols(built) * f.col(0));
                remaining -= tau;
                if (err > 0)
                    tau *= std::min(2.0, 0.9 * std::pow(tol * std::max(1.0, beta) / err, 1.0 / built));
                else
                    tau *= 2.0;
                break;
            }
            tau *= 0.5;
        }
    }
    return v;
}

// Dormand-Prince 5(4) step; returns the 5th-order solution and an error estimate.
struct Rk45Step {
    DenseVector y5;
    double err;
};

Rk45Step rk45_step(const SparseMatrix& l, const DenseVector& y, double h, double rel, double abs) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const DenseVector k1 = l * y;
    const DenseVector k2 = l * (y + h * a21 * k1);
    const DenseVector k3 = l * (y + h * (a31 * k1 + a32 * k2));
    const DenseVector k4 = l * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const DenseVector k5 = l * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const DenseVector k6 = l * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    DenseVector y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const DenseVector k7 = l * y5;
    const DenseVector ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = abs + rel * std::max(std::abs(y(i)), std::abs(y5(i)));
        err = std::max(err, std::abs(ev(i)) / sc);
    }
    return {std::move(y5), err};
}

DenseVector rk45_to(const SparseMatrix& l, DenseVector y, double t0, double t1, double& h,
                    double rel, double abs) {
    double t = t0;
    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h < 1e-18 * std::max(t1, 1.0))
            throw std::runtime_error("evolve: step-size underflow");
        auto step = rk45_step(l, y, h, rel, abs);
        if (step.err <= 1.0) {
            t += h;
            y = std::move(step.y5);
            h *= std::min(5.0, 0.9 * std::pow(1.0 / std::max(step.err, 1e-10), 0.2));
        } else {
            h *= std::max(0.1, 0.9 * std::pow(1.0 / step.err, 0.2));
        }
    }
    return y;
}

}  // namespace

TransientTrace evolve(const Liouvillian& liouv, const DensityMatrix& rho0,
                      const std::vector<double>& t_grid, const SparseMatrix& a_op,
                      int n_trans, const EvolveOpts& opts) {
    if (t_grid.empty() || t_grid.front() < 0)
        throw std::invalid_argument("evolve: grid must start at t >= 0");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1])
            throw std::invalid_argument("evolve: grid must be strictly increasing");
    if (a_op.rows() != liouv.dim)
        throw std::invalid_argument("evolve: observable shape mismatch");

    const int d = liouv.dim;
    const double lnorm = liouv.norm_inf();
    double max_dt = t_grid.front();
    for (size_t i = 1; i < t_grid.size(); ++i) max_dt = std::max(max_dt, t_grid[i] - t_grid[i - 1]);
    const bool krylov = lnorm * max_dt > opts.stiffness_switch;

    TransientTrace trace;
    trace.integrator = krylov ? "krylov" : "rk45";

    DenseVector y = vectorize(rho0.rho);
    double t = 0.0;
    double h = 0.1 / std::max(lnorm, 1e-300);

    auto record = [&](double tt, const DenseVector& v) {
        DenseMatrix rho = unvectorize(v, d);
        if (opts.check_physical) {
            if (std::abs(rho.trace() - Complex(1.0)) > 1e-9)
                throw std::runtime_error("evolve: trace conservation violated");
            Eigen::SelfAdjointEigenSolver<DenseMatrix> es(
                DenseMatrix(0.5 * (rho + rho.adjoint())), Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-7)
                throw std::runtime_error("evolve: positivity violated along trajectory");
        }
        trace.times.push_back(tt);
        trace.amp.push_back((rho * DenseMatrix(a_op)).trace());
        std::vector<double> pops(n_trans, 0.0);
        for (int n = 0; n < n_trans; ++n)
            for (int m = 0; m * n_trans + n < d; ++m)
                pops[n] += rho(m * n_trans + n, m * n_trans + n).real();
        trace.transmon_pops.push_back(std::move(pops));
    };

    for (double tt : t_grid) {
        if (tt > t) {
            if (krylov)
                y = krylov_expv(liouv.l, std::move(y), tt - t, opts.krylov_dim, opts.abs_tol * 1e2);
            else
                y = rk45_to(liouv.l, std::move(y), t, tt, h, opts.rel_tol, opts.abs_tol);
            t = tt;
        }
        record(tt, y);
    }
    return trace;
}

SlowdownFit fit_slowdown(const TransientTrace& trace, double t0, double t1) {
    std::vector<double> ts, ys;
    for (size_t i = 0; i < trace.times.size(); ++i)
        if (trace.times[i] >= t0 && trace.times[i] <= t1) {
            ts.push_back(trace.times[i]);
            ys.push_back(std::abs(trace.amp[i]));
        }
    if (ts.size() < 4)
        throw std::invalid_argument("fit_slowdown: window contains fewer than 4 samples");

    const double span = ts.back() - ts.front();
    const double ymax = *std::max_element(ys.begin(), ys.end());
    const double ymin = *std::min_element(ys.begin(), ys.end());

    SlowdownFit fit;
    if (ymax - ymin < 1e-12 * std::max(ymax, 1e-300)) {
        fit.undefined = true;
        fit.offset = 0.5 * (ymax + ymin);
        fit.t_s = 0.0;
        return fit;
    }

    // Variable projection: linear LS in (c0, c1) for fixed tau, golden
    // section over log tau.
    auto sse = [&](double tau, double* c0 = nullptr, double* c1 = nullptr) {
        double s11 = double(ts.size()), s1e = 0, see = 0, sy = 0, sye = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double e = std::exp(-(ts[i] - ts.front()) / tau);
            s1e += e;
            see += e * e;
            sy += ys[i];
            sye += ys[i] * e;
        }
        const double det = s11 * see - s1e * s1e;
        if (std::abs(det) < 1e-300) return 1e300;
        const double a0 = (see * sy - s1e * sye) / det;
        const double a1 = (s11 * sye - s1e * sy) / det;
        if (c0) *c0 = a0;
        if (c1) *c1 = a1;
        double s = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double r = ys[i] - a0 - a1 * std::exp(-(ts[i] - ts.front()) / tau);
            s += r * r;
        }
        return s;
    };

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::log(span * 1e-4), hi = std::log(span * 50.0);
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = sse(std::exp(x1)), f2 = sse(std::exp(x2));
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = sse(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = sse(std::exp(x2));
        }
    }
    const double tau = std::exp(0.5 * (lo + hi));
    double c0 = 0, c1 = 0;
    const double best = sse(tau, &c0, &c1);
    // c1 is referenced to t = ts.front(); rescale the amplitude to t = 0
    fit.t_s = tau;
    fit.amplitude = c1 * std::exp(ts.front() / tau);
    fit.offset = c0;
    fit.residual = std::sqrt(best / double(ts.size()));
    fit.low_confidence = span < 2.0 * tau;
    if (std::abs(c1) < 1e-8 * std::max(std::abs(c0), 1e-300)) fit.undefined = true;
    return fit;
}

ConvergeResult converge_truncation(
    const std::function<double(const HilbertSpace&)>& observable,
    HilbertSpace start, double rel_tol, int max_cav, int max_trans) {
    ConvergeResult res{start, false, 0.0, {}};
    HilbertSpace cur = start;
    double val = observable(cur);
    res.history.emplace_back(cur, val);
    while (true) {
        HilbertSpace probe(std::max(cur.n_cav + 1, int(std::ceil(cur.n_cav * 1.25))),
                           std::min(cur.n_trans + 1, max_trans));
        if (probe.n_cav > max_cav) break;
        const double pv = observable(probe);
        res.history.emplace_back(probe, pv);
        res.last_change = std::abs(pv - val) / std::max(std::abs(pv), 1e-300);
        if (res.last_change < rel_tol) {
            res.space = cur;
            res.converged = true;
            return res;
        }
        cur = probe;
        val = pv;
    }
    res.space = cur;
    return res;
}

}  // namespace cqed
