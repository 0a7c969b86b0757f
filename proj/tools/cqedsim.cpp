// cqedsim: batch CLI over the simulator library. Subcommands produce CSV
// data plus a JSON metadata sidecar per run.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqed/config.hpp"
#include "cqed/io.hpp"
#include "cqed/liouvillian.hpp"
#include "cqed/meanfield.hpp"
#include "cqed/rates.hpp"
#include "cqed/solvers.hpp"
#include "cqed/sweep.hpp"

namespace {

using namespace cqed;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitTotal = 4;

struct Ctx {
    RunConfig cfg;
    std::string out_dir = ".";
    std::string model = "gjc";
    int workers = 0;  // 0: use config value

    TransmonSpectrum spec;          // filled for gjc runs
    bool have_spec = false;
    DuffingParams dp;               // filled for duffing runs
    bool have_dp = false;

    int effective_workers() const { return workers > 0 ? workers : cfg.workers; }

    std::string path(const std::string& name) const {
        return (fs::path(out_dir) / name).string();
    }
};

std::string clean_msg(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

struct GridPoint {
    double omega_d = 0.0;  // rad/s
    double eps = 0.0;      // rad/s
    std::optional<double> power_dbm;
};

void prepare_models(Ctx& ctx) {
    if (ctx.model == "gjc") {
        if (ctx.cfg.dev.omega_c == 0)
            throw ConfigError("config: [device] section required for the gjc model");
        ctx.spec = diagonalize_transmon(ctx.cfg.dev.E_J, ctx.cfg.dev.E_C, ctx.cfg.n_trans);
        coupling_matrix(ctx.spec, ctx.cfg.dev.g0);
        ctx.have_spec = true;
    } else {
        if (ctx.cfg.duffing) {
            ctx.dp = *ctx.cfg.duffing;
        } else {
            if (ctx.cfg.dev.omega_c == 0)
                throw ConfigError("config: duffing model needs [duffing] or [device]");
            ctx.dp = project_duffing(dressed_ladder(ctx.cfg.dev, 4), ctx.cfg.dev);
        }
        ctx.have_dp = true;
    }
}

void ensure_calibration(Ctx& ctx, bool needed) {
    if (!needed || ctx.cfg.calib) return;
    if (!ctx.cfg.calib_auto)
        throw ConfigError("config: power in dBm requires a [calibration] block");
    ctx.cfg.calib = default_calibration(ctx.cfg.dev, std::max(ctx.cfg.n_trans, 4));
}

std::vector<double> axis_values(const AxisSpec& ax) {
    std::vector<double> v;
    for (int i = 0; i < ax.count; ++i) {
        const double f = ax.count > 1 ? double(i) / double(ax.count - 1) : 0.0;
        v.push_back(ax.log ? ax.start * std::pow(ax.stop / ax.start, f)
                           : ax.start + (ax.stop - ax.start) * f);
    }
    return v;
}

std::vector<GridPoint> expand_grid(Ctx& ctx) {
    const RunConfig& cfg = ctx.cfg;
    bool power_used = cfg.power_dbm.has_value();
    for (const auto& ax : cfg.axes) power_used |= ax.name == "power_dbm";
    ensure_calibration(ctx, power_used);

    GridPoint base;
    base.omega_d = cfg.omega_d;
    if (cfg.eps) base.eps = *cfg.eps;
    if (cfg.power_dbm) {
        base.power_dbm = cfg.power_dbm;
        base.eps = cfg.eps_from_power(*cfg.power_dbm);
    }

    std::vector<GridPoint> pts{base};
    for (const auto& ax : cfg.axes) {
        std::vector<GridPoint> next;
        for (const auto& p : pts)
            for (double v : axis_values(ax)) {
                GridPoint q = p;
                if (ax.name == "omega_d_hz") {
                    q.omega_d = kTwoPi * v;
                } else if (ax.name == "eps_hz") {
                    q.eps = kTwoPi * v;
                } else {
                    q.power_dbm = v;
                    q.eps = cfg.eps_from_power(v);
                }
                next.push_back(q);
            }
        pts = std::move(next);
    }
    return pts;
}

Liouvillian build_point(const Ctx& ctx, const GridPoint& pt, int n_cav, int n_trans,
                        SparseMatrix* a_out) {
    if (ctx.model == "gjc") {
        HilbertSpace space(n_cav, n_trans);
        GjcModel m = build_gjc(ctx.cfg.dev, DriveParams(pt.omega_d, pt.eps), space, &ctx.spec);
        if (a_out) *a_out = annihilator_cavity(space).mat;
        return assemble(m);
    }
    DuffingModel m = build_duffing(ctx.dp, DriveParams(pt.omega_d, pt.eps), n_cav);
    if (a_out) *a_out = fock_annihilator(n_cav);
    return assemble(m);
}

std::vector<std::string> point_cells(const GridPoint& pt) {
    return {CsvWriter::num(pt.omega_d / kTwoPi), CsvWriter::num(pt.eps / kTwoPi),
            pt.power_dbm ? CsvWriter::num(*pt.power_dbm) : std::string()};
}

int finish(Ctx& ctx, const std::string& command, const std::string& csv_name,
           int n_points, int n_failed, std::map<std::string, std::string> extra,
           std::vector<std::string> warnings, double wall) {
    SidecarInfo info;
    info.command = command;
    info.resolved_config = ctx.cfg.raw;
    if (ctx.cfg.calib) {
        info.resolved_config["calibration.resolved_eps_ref_hz"] =
            CsvWriter::num(ctx.cfg.calib->eps_ref / kTwoPi);
        info.resolved_config["calibration.resolved_p_ref_dbm"] =
            CsvWriter::num(ctx.cfg.calib->p_ref_dbm);
    }
    info.n_cav = ctx.cfg.n_cav;
    info.n_trans = ctx.model == "gjc" ? ctx.cfg.n_trans : 1;
    info.wall_seconds = wall;
    info.n_points = n_points;
    info.n_failed = n_failed;
    info.extra = std::move(extra);
    info.warnings = std::move(warnings);
    write_sidecar(ctx.path(csv_name + ".meta.json"), info);
    if (n_failed == 0) return kExitOk;
    return n_failed == n_points ? kExitTotal : kExitPartial;
}

// ---------------------------------------------------------------------------

int cmd_spectrum(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);

    struct Row {
        Complex amp{};
        bool failed = false;
        std::string error;
    };
    std::vector<Row> rows(pts.size());
    parallel_for(int(pts.size()), ctx.effective_workers(), [&](int i) {
        try {
            SparseMatrix a;
            Liouvillian l = build_point(ctx, pts[size_t(i)], ctx.cfg.n_cav, ctx.cfg.n_trans, &a);
            DensityMatrix rho = steady_state(l);
            rows[size_t(i)].amp = (rho.rho * DenseMatrix(a)).trace();
        } catch (const std::exception& e) {
            rows[size_t(i)] = {Complex{}, true, clean_msg(e.what())};
        }
    });

    CsvWriter csv(ctx.path("spectrum.csv"));
    csv.header({"omega_d_hz", "eps_hz", "power_dbm", "re_tr_rho_a", "im_tr_rho_a",
                "abs_tr_rho_a", "failed", "error"});
    int n_failed = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        auto cells = point_cells(pts[i]);
        const Row& r = rows[i];
        cells.push_back(CsvWriter::num(r.amp.real()));
        cells.push_back(CsvWriter::num(r.amp.imag()));
        cells.push_back(CsvWriter::num(std::abs(r.amp)));
        cells.push_back(r.failed ? "1" : "0");
        cells.push_back(r.error);
        csv.row(cells);
        n_failed += r.failed;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "spectrum", "spectrum.csv", int(pts.size()), n_failed, {}, {}, wall);
}

int cmd_transient(Ctx& ctx) {
    const auto t0c = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);
    if (pts.size() != 1)
        throw ConfigError("transient: sweeps not supported; give a single drive point");
    if (ctx.cfg.t_max <= 0) throw ConfigError("transient: solver.t_max_s must be > 0");

    std::vector<double> thetas = ctx.cfg.thetas.empty() ? std::vector<double>{0.0}
                                                        : ctx.cfg.thetas;
    for (double th : thetas)
        if (th < 0 || th > M_PI + 1e-12)
            throw ConfigError("transient: theta values must lie in [0, pi]");

    std::vector<double> grid;
    for (int i = 1; i <= ctx.cfg.n_times; ++i)
        grid.push_back(ctx.cfg.t_max * double(i) / double(ctx.cfg.n_times));

    const double kap = ctx.model == "gjc" ? ctx.cfg.dev.kappa : ctx.dp.kappa_tilde;
    const double gam = ctx.cfg.dev.gamma;
    const double t_fast = std::max(kap > 0 ? kTwoPi / kap : 0.0, gam > 0 ? 1.0 / gam : 0.0);
    const double fit_t0 = ctx.cfg.fit_t0.value_or(5.0 * t_fast);

    SparseMatrix a;
    Liouvillian liouv = build_point(ctx, pts[0], ctx.cfg.n_cav, ctx.cfg.n_trans, &a);

    struct Run {
        TransientTrace trace;
        SlowdownFit fit{};
        bool fit_ok = false;
        bool failed = false;
        std::string error;
    };
    std::vector<Run> runs(thetas.size());
    EvolveOpts eopts;
    eopts.rel_tol = ctx.cfg.rel_tol;
    eopts.abs_tol = ctx.cfg.abs_tol;
    parallel_for(int(thetas.size()), ctx.effective_workers(), [&](int i) {
        Run& run = runs[size_t(i)];
        try {
            DensityMatrix rho0 =
                ctx.model == "gjc"
                    ? initial_state(HilbertSpace(ctx.cfg.n_cav, ctx.cfg.n_trans),
                                    thetas[size_t(i)])
                    : ground_state(ctx.cfg.n_cav);
            run.trace = evolve(liouv, rho0, grid, a, ctx.model == "gjc" ? ctx.cfg.n_trans : 1,
                               eopts);
            if (fit_t0 < ctx.cfg.t_max) {
                run.fit = fit_slowdown(run.trace, fit_t0, ctx.cfg.t_max);
                run.fit_ok = true;
            }
        } catch (const std::exception& e) {
            run.failed = true;
            run.error = clean_msg(e.what());
        }
    });

    const int n_pops = ctx.model == "gjc" ? ctx.cfg.n_trans : 1;
    std::vector<std::string> cols{"time_s", "theta_rad", "re_tr_rho_a", "im_tr_rho_a",
                                  "abs_tr_rho_a", "failed"};
    for (int n = 0; n < n_pops; ++n) cols.push_back("transmon_pop_" + std::to_string(n));
    CsvWriter csv(ctx.path("transient.csv"));
    csv.header(cols);

    int n_failed = 0;
    std::map<std::string, std::string> extra;
    std::vector<std::string> warnings;
    for (size_t k = 0; k < thetas.size(); ++k) {
        const Run& run = runs[k];
        const std::string th = CsvWriter::num(thetas[k]);
        if (run.failed) {
            ++n_failed;
            warnings.push_back("theta " + th + ": " + run.error);
            continue;
        }
        for (size_t i = 0; i < run.trace.times.size(); ++i) {
            std::vector<std::string> cells{CsvWriter::num(run.trace.times[i]), th,
                                           CsvWriter::num(run.trace.amp[i].real()),
                                           CsvWriter::num(run.trace.amp[i].imag()),
                                           CsvWriter::num(std::abs(run.trace.amp[i])), "0"};
            for (int n = 0; n < n_pops; ++n)
                cells.push_back(CsvWriter::num(run.trace.transmon_pops[i][size_t(n)]));
            csv.row(cells);
        }
        if (run.fit_ok) {
            extra["fit_t_s_theta_" + th] = CsvWriter::num(run.fit.t_s);
            extra["fit_amplitude_theta_" + th] = CsvWriter::num(run.fit.amplitude);
            if (run.fit.low_confidence)
                warnings.push_back("theta " + th + ": fit window shorter than 2 T_s");
            if (run.fit.undefined)
                warnings.push_back("theta " + th + ": no resolvable slow decay");
        }
        extra["integrator_theta_" + th] = run.trace.integrator;
    }
    extra["fit_t0_s"] = CsvWriter::num(fit_t0);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c).count();
    return finish(ctx, "transient", "transient.csv", int(thetas.size()), n_failed,
                  std::move(extra), std::move(warnings), wall);
}

int cmd_gap_sweep(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);

    struct Row {
        double adr = 0, t_s = 0, im1 = 0;
        bool sep_ok = false;
        bool failed = false;
        std::string error;
    };
    std::vector<Row> rows(pts.size());
    parallel_for(int(pts.size()), ctx.effective_workers(), [&](int i) {
        Row& r = rows[size_t(i)];
        try {
            Liouvillian l = build_point(ctx, pts[size_t(i)], ctx.cfg.n_cav, ctx.cfg.n_trans,
                                        nullptr);
            SpectralOpts sopts;
            sopts.want_left = false;
            SpectralResult sr = spectral_gap(l, sopts);
            r.adr = sr.adr;
            r.t_s = sr.t_s;
            r.im1 = sr.lambda1.imag();
            r.sep_ok = std::abs(sr.lambda2.real()) > 5.0 * sr.adr;
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = clean_msg(e.what());
        }
    });

    CsvWriter csv(ctx.path("gap_sweep.csv"));
    csv.header({"omega_d_hz", "eps_hz", "power_dbm", "adr_rad_per_s", "t_s_s",
                "im_lambda1_rad_per_s", "gap_separated", "failed", "error"});
    int n_failed = 0;
    // per drive-amplitude maximum over frequency, for the saturation plots
    std::map<std::string, double> max_ts;
    for (size_t i = 0; i < pts.size(); ++i) {
        auto cells = point_cells(pts[i]);
        const Row& r = rows[i];
        cells.push_back(CsvWriter::num(r.adr));
        cells.push_back(CsvWriter::num(r.t_s));
        cells.push_back(CsvWriter::num(r.im1));
        cells.push_back(r.sep_ok ? "1" : "0");
        cells.push_back(r.failed ? "1" : "0");
        cells.push_back(r.error);
        csv.row(cells);
        n_failed += r.failed;
        if (!r.failed) {
            const std::string key = pts[i].power_dbm
                                        ? CsvWriter::num(*pts[i].power_dbm) + "_dbm"
                                        : CsvWriter::num(pts[i].eps / kTwoPi) + "_hz";
            auto [it, fresh] = max_ts.try_emplace(key, r.t_s);
            if (!fresh) it->second = std::max(it->second, r.t_s);
        }
    }
    std::map<std::string, std::string> extra;
    for (const auto& [k, v] : max_ts) extra["max_t_s_at_" + k] = CsvWriter::num(v);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "gap-sweep", "gap_sweep.csv", int(pts.size()), n_failed,
                  std::move(extra), {}, wall);
}

void write_boundary_csv(CsvWriter& csv, const BistabilityBoundary& bd,
                        const std::optional<PowerCalibration>& calib) {
    auto emit = [&](const char* edge, const BoundaryPoint& p) {
        std::vector<std::string> cells{bd.model, edge, CsvWriter::num(p.omega_d / kTwoPi),
                                       CsvWriter::num(p.eps / kTwoPi)};
        cells.push_back(calib ? CsvWriter::num(calib->p_ref_dbm +
                                               20.0 * std::log10(p.eps / calib->eps_ref))
                              : std::string());
        csv.row(cells);
    };
    for (const auto& p : bd.lower) emit("lower", p);
    for (const auto& p : bd.upper) emit("upper", p);
}

int cmd_mf_boundary(Ctx& ctx, bool model_given) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!ctx.cfg.boundary.set)
        throw ConfigError("mf-boundary: [boundary] section required");
    const BoundaryRange& br = ctx.cfg.boundary;
    BoundaryGrid grid{br.omega_lo, br.omega_hi, br.eps_lo, br.eps_hi,
                      br.n_omega, br.n_eps, 1e-9};

    std::vector<std::string> models =
        model_given ? std::vector<std::string>{ctx.model}
                    : std::vector<std::string>{"gjc", "duffing"};
    if (ctx.cfg.calib_auto) ensure_calibration(ctx, true);

    std::map<std::string, std::string> extra;
    std::vector<std::string> warnings;
    std::vector<BistabilityBoundary> results;
    int n_failed = 0;
    for (const auto& model : models) {
        try {
            BistabilityBoundary bd;
            if (model == "gjc") {
                bd = trace_boundary_gjc(ctx.cfg.dev, ctx.cfg.n_trans, grid);
            } else {
                Ctx tmp = ctx;
                tmp.model = "duffing";
                prepare_models(tmp);
                bd = trace_boundary_duffing(tmp.dp, grid);
            }
            if (bd.empty) {
                warnings.push_back(model + ": no bistable region in the scanned window");
            } else {
                extra["onset_eps_hz_" + model] = CsvWriter::num(bd.onset_eps / kTwoPi);
                extra["onset_omega_d_hz_" + model] = CsvWriter::num(bd.onset_omega_d / kTwoPi);
                if (ctx.cfg.calib)
                    extra["onset_power_dbm_" + model] = CsvWriter::num(
                        ctx.cfg.calib->p_ref_dbm +
                        20.0 * std::log10(bd.onset_eps / ctx.cfg.calib->eps_ref));
            }
            CsvWriter csv(ctx.path("boundary_" + model + ".csv"));
            csv.header({"model", "edge", "omega_d_hz", "eps_hz", "power_dbm"});
            write_boundary_csv(csv, bd, ctx.cfg.calib);
            results.push_back(std::move(bd));
        } catch (const std::exception& e) {
            ++n_failed;
            warnings.push_back(model + ": " + clean_msg(e.what()));
        }
    }
    if (results.size() > 1) {
        CsvWriter overlay(ctx.path("boundary_overlay.csv"));
        overlay.header({"model", "edge", "omega_d_hz", "eps_hz", "power_dbm"});
        for (const auto& bd : results) write_boundary_csv(overlay, bd, ctx.cfg.calib);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "mf-boundary", "boundary", int(models.size()), n_failed,
                  std::move(extra), std::move(warnings), wall);
}

int cmd_mf_branches(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);
    if (pts.size() < 2) throw ConfigError("mf-branches: need a drive-amplitude sweep axis");
    for (size_t i = 1; i < pts.size(); ++i)
        if (pts[i].omega_d != pts[0].omega_d || pts[i].eps <= pts[i - 1].eps)
            throw ConfigError("mf-branches: sweep must increase eps at fixed omega_d");

    std::vector<double> eps_values;
    for (const auto& p : pts) eps_values.push_back(p.eps);

    std::function<std::vector<MeanFieldPoint>(double)> builder;
    if (ctx.model == "gjc") {
        builder = [&ctx, w = pts[0].omega_d](double e) {
            MeanFieldParams p = make_gjc_meanfield(ctx.cfg.dev, DriveParams(w, e),
                                                   ctx.cfg.n_trans, &ctx.spec);
            return find_fixed_points(p);
        };
    } else {
        builder = [&ctx, w = pts[0].omega_d](double e) {
            KerrMeanField k{ctx.dp.omega_tilde_c - w, ctx.dp.kerr, ctx.dp.kappa_tilde,
                            ctx.dp.eps_tilde_ratio * e};
            return kerr_fixed_points(k);
        };
    }
    BranchSweep sweep = branch_occupations(builder, eps_values);

    CsvWriter csv(ctx.path("branches.csv"));
    csv.header({"omega_d_hz", "eps_hz", "power_dbm", "bright_n_cavity", "bright_n_transmon",
                "bright_present", "dim_n_cavity", "dim_n_transmon", "dim_present",
                "reseeded"});
    for (size_t i = 0; i < pts.size(); ++i) {
        auto cells = point_cells(pts[i]);
        const BranchPoint& b = sweep.bright[i];
        const BranchPoint& d = sweep.dim[i];
        const bool re = std::find(sweep.reseeded.begin(), sweep.reseeded.end(), int(i)) !=
                        sweep.reseeded.end();
        cells.insert(cells.end(),
                     {CsvWriter::num(b.n_cavity), CsvWriter::num(b.n_transmon),
                      b.present ? "1" : "0", CsvWriter::num(d.n_cavity),
                      CsvWriter::num(d.n_transmon), d.present ? "1" : "0", re ? "1" : "0"});
        csv.row(cells);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "mf-branches", "branches.csv", int(pts.size()), 0, {}, {}, wall);
}

int cmd_duffing_project(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    if (ctx.cfg.dev.omega_c == 0)
        throw ConfigError("duffing-project: [device] section required");
    DressedLadder ladder = dressed_ladder(ctx.cfg.dev, 4);
    DuffingParams p = project_duffing(ladder, ctx.cfg.dev);

    nlohmann::ordered_json j;
    char buf[40];
    auto s = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    // config_keys round-trips through the [duffing] section of the loader
    j["config_keys"] = {
        {"duffing.omega_tilde_c_hz", s(p.omega_tilde_c / kTwoPi)},
        {"duffing.kerr_hz", s(p.kerr / kTwoPi)},
        {"duffing.kappa_tilde_hz", s(p.kappa_tilde / kTwoPi)},
        {"duffing.kappa_tilde_phi_hz", s(p.kappa_tilde_phi / kTwoPi)},
        {"duffing.n_tilde_c", s(p.n_tilde_c)},
        {"duffing.eps_tilde_ratio", s(p.eps_tilde_ratio)},
        {"duffing.r_a", s(p.r_a)},
        {"duffing.r_b", s(p.r_b)},
        {"duffing.r_nb", s(p.r_nb)},
    };
    j["omega_tilde_c_hz"] = p.omega_tilde_c / kTwoPi;
    j["kerr_hz"] = p.kerr / kTwoPi;
    j["eps_tilde_ratio"] = p.eps_tilde_ratio;
    j["kappa_tilde_hz"] = p.kappa_tilde / kTwoPi;
    j["n_tilde_c"] = p.n_tilde_c;
    j["kappa_tilde_phi_hz"] = p.kappa_tilde_phi / kTwoPi;
    j["r_a"] = p.r_a;
    j["r_b"] = p.r_b;
    j["r_nb"] = p.r_nb;
    for (size_t m = 0; m < ladder.energies.size(); ++m) {
        j["ladder_energies_hz"].push_back(ladder.energies[m] / kTwoPi);
        j["ladder_overlaps"].push_back(ladder.overlaps[m]);
    }
    std::ofstream f(ctx.path("duffing_project.json"));
    if (!f) throw std::runtime_error("duffing-project: cannot open output file");
    f << j.dump(2) << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "duffing-project", "duffing_project.json", 1, 0,
                  {{"wall_seconds", CsvWriter::num(wall)}}, {}, wall);
}

int cmd_rates(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);

    struct Row {
        double gbd = 0, gdb = 0, t_s = 0, pb = 0;
        std::string flags;
        bool failed = false;
        std::string error;
    };
    std::vector<Row> rows(pts.size());
    parallel_for(int(pts.size()), ctx.effective_workers(), [&](int i) {
        Row& r = rows[size_t(i)];
        try {
            SparseMatrix a;
            Liouvillian l = build_point(ctx, pts[size_t(i)], ctx.cfg.n_cav, ctx.cfg.n_trans, &a);
            SpectralResult sr = spectral_gap(l);
            auto [rates, split] = extract_rates(sr, a);
            r.gbd = rates.gamma_bd;
            r.gdb = rates.gamma_db;
            r.t_s = rates.t_s();
            r.pb = split.p_b_ss;
            for (size_t k = 0; k < split.flags.size(); ++k)
                r.flags += (k ? "; " : "") + split.flags[k];
            r.flags = clean_msg(r.flags);
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = clean_msg(e.what());
        }
    });

    CsvWriter csv(ctx.path("rates.csv"));
    csv.header({"omega_d_hz", "eps_hz", "power_dbm", "gamma_bd_per_s", "gamma_db_per_s",
                "t_s_s", "p_bright_ss", "flags", "failed", "error"});
    int n_failed = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        auto cells = point_cells(pts[i]);
        const Row& r = rows[i];
        cells.insert(cells.end(),
                     {CsvWriter::num(r.gbd), CsvWriter::num(r.gdb), CsvWriter::num(r.t_s),
                      CsvWriter::num(r.pb), r.flags, r.failed ? "1" : "0", r.error});
        csv.row(cells);
        n_failed += r.failed;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "rates", "rates.csv", int(pts.size()), n_failed, {}, {}, wall);
}

int cmd_converge(Ctx& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    prepare_models(ctx);
    auto pts = expand_grid(ctx);
    if (pts.size() != 1) throw ConfigError("converge: give a single drive point");
    const GridPoint pt = pts[0];

    auto observable = [&](const HilbertSpace& space) {
        SparseMatrix a;
        Ctx local = ctx;  // spectra are immutable; copy shares nothing mutable
        Liouvillian l = build_point(local, pt, space.n_cav, space.n_trans, &a);
        DensityMatrix rho = steady_state(l);
        return std::abs((rho.rho * DenseMatrix(a)).trace());
    };
    const int nt0 = ctx.model == "gjc" ? ctx.cfg.n_trans : 1;
    ConvergeResult res = converge_truncation(observable, HilbertSpace(ctx.cfg.n_cav, nt0),
                                             ctx.cfg.converge_tol, 200,
                                             ctx.model == "gjc" ? 12 : 1);

    CsvWriter csv(ctx.path("converge.csv"));
    csv.header({"n_cav", "n_trans", "abs_tr_rho_a"});
    for (const auto& [space, val] : res.history)
        csv.row({CsvWriter::num(space.n_cav), CsvWriter::num(space.n_trans),
                 CsvWriter::num(val)});

    std::map<std::string, std::string> extra{
        {"converged", res.converged ? "true" : "false"},
        {"n_cav", CsvWriter::num(res.space.n_cav)},
        {"n_trans", CsvWriter::num(res.space.n_trans)},
        {"last_change", CsvWriter::num(res.last_change)}};
    std::vector<std::string> warnings;
    if (!res.converged)
        warnings.push_back("truncation cap reached before convergence; see history trend");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finish(ctx, "converge", "converge.csv", int(res.history.size()),
                  res.converged ? 0 : int(res.history.size()), std::move(extra),
                  std::move(warnings), wall);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven cavity-transmon simulator: steady states, Liouvillian gaps, "
                 "transients, mean-field bistability"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", model = "gjc";
    int workers = 0;
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads (overrides run.workers)");
    auto* model_opt =
        app.add_option("--model", model, "physical model")->check(CLI::IsMember({"gjc", "duffing"}));

    auto* sc_spectrum = app.add_subcommand("spectrum", "steady-state transmission sweep");
    auto* sc_transient = app.add_subcommand("transient", "step-drive time evolution");
    auto* sc_gap = app.add_subcommand("gap-sweep", "Liouvillian gap / T_s sweep");
    auto* sc_bound = app.add_subcommand("mf-boundary", "mean-field bistability boundary");
    auto* sc_branch = app.add_subcommand("mf-branches", "mean-field branch occupations");
    auto* sc_proj = app.add_subcommand("duffing-project", "dressed-state effective model");
    auto* sc_rates = app.add_subcommand("rates", "two-state switching rates");
    auto* sc_conv = app.add_subcommand("converge", "truncation convergence walk");

    // allow the shared options to appear after the subcommand name
    for (auto* sc : {sc_spectrum, sc_transient, sc_gap, sc_bound, sc_branch, sc_proj,
                     sc_rates, sc_conv})
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        Ctx ctx;
        ctx.cfg = load_config(config_path);
        ctx.out_dir = out_dir;
        ctx.model = model;
        ctx.workers = workers;
        fs::create_directories(out_dir);

        if (sc_spectrum->parsed()) return cmd_spectrum(ctx);
        if (sc_transient->parsed()) return cmd_transient(ctx);
        if (sc_gap->parsed()) return cmd_gap_sweep(ctx);
        if (sc_bound->parsed()) return cmd_mf_boundary(ctx, model_opt->count() > 0);
        if (sc_branch->parsed()) return cmd_mf_branches(ctx);
        if (sc_proj->parsed()) return cmd_duffing_project(ctx);
        if (sc_rates->parsed()) return cmd_rates(ctx);
        if (sc_conv->parsed()) return cmd_converge(ctx);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTotal;
    }
}
