#include "cqed/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cqed {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    const int i = int(x);
    if (double(i) != x) throw ConfigError("config: integer expected for '" + key + "'");
    return i;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: boolean expected for '" + key + "'");
}

struct KeyMap {
    std::map<std::string, std::string> kv;

    std::optional<std::string> get(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    }
    double num(const std::string& k, double dflt) const {
        auto v = get(k);
        return v ? to_double(k, *v) : dflt;
    }
    double req(const std::string& k) const {
        auto v = get(k);
        if (!v) throw ConfigError("config: missing required key '" + k + "'");
        return to_double(k, *v);
    }
};

double hz(double v) { return kTwoPi * v; }

AxisSpec parse_axis(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    AxisSpec ax;
    std::string scale;
    if (!(ss >> ax.name >> ax.start >> ax.stop >> ax.count >> scale))
        throw ConfigError("config: axis format is 'name start stop count lin|log' for '" +
                          key + "'");
    if (scale == "log")
        ax.log = true;
    else if (scale != "lin")
        throw ConfigError("config: axis scale must be lin or log for '" + key + "'");
    if (ax.count < 1) throw ConfigError("config: axis count must be >= 1 for '" + key + "'");
    if (ax.name != "omega_d_hz" && ax.name != "eps_hz" && ax.name != "power_dbm")
        throw ConfigError("config: unknown axis name '" + ax.name + "'");
    if (ax.log && (ax.start <= 0 || ax.stop <= 0))
        throw ConfigError("config: log axis requires positive endpoints for '" + key + "'");
    return ax;
}

}  // namespace

DuffingParams duffing_from_keys(const std::map<std::string, std::string>& keys) {
    KeyMap m{keys};
    DuffingParams p;
    p.omega_tilde_c = hz(m.req("duffing.omega_tilde_c_hz"));
    p.kerr = hz(m.req("duffing.kerr_hz"));
    p.kappa_tilde = hz(m.req("duffing.kappa_tilde_hz"));
    p.kappa_tilde_phi = hz(m.num("duffing.kappa_tilde_phi_hz", 0.0));
    p.n_tilde_c = m.num("duffing.n_tilde_c", 0.0);
    p.eps_tilde_ratio = m.num("duffing.eps_tilde_ratio", 1.0);
    p.r_a = m.num("duffing.r_a", p.eps_tilde_ratio);
    p.r_b = m.num("duffing.r_b", 0.0);
    p.r_nb = m.num("duffing.r_nb", 0.0);
    return p;
}

double RunConfig::eps_from_power(double p_dbm) const {
    if (!calib) throw ConfigError("config: power in dBm requires a [calibration] block");
    return calib->eps_at(p_dbm);
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);

    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos || section.empty()) {
            std::ostringstream msg;
            msg << "config: parse error at line " << lineno << " of " << path;
            throw ConfigError(msg.str());
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = trim(line.substr(eq + 1));
    }

    KeyMap m{kv};
    RunConfig cfg;
    cfg.raw = kv;

    if (kv.count("device.omega_c_hz")) {
        cfg.dev.omega_c = hz(m.req("device.omega_c_hz"));
        cfg.dev.E_J = hz(m.req("device.e_j_hz"));
        cfg.dev.E_C = hz(m.req("device.e_c_hz"));
        cfg.dev.g0 = hz(m.num("device.g0_hz", 0.0));
        cfg.dev.delta0 = hz(m.num("device.delta0_hz", 0.0));
        cfg.dev.kappa = hz(m.num("device.kappa_hz", 0.0));
        cfg.dev.gamma = hz(m.num("device.gamma_hz", 0.0));
        cfg.dev.gamma_phi = hz(m.num("device.gamma_phi_hz", 0.0));
        cfg.dev.n_c = m.num("device.n_c", 0.0);
        cfg.dev.n_t = m.num("device.n_t", 0.0);
        cfg.dev.validate();
    }
    if (kv.count("duffing.omega_tilde_c_hz")) cfg.duffing = duffing_from_keys(kv);
    if (!kv.count("device.omega_c_hz") && !cfg.duffing)
        throw ConfigError("config: need a [device] or [duffing] section");

    cfg.n_cav = to_int("truncation.n_cav", m.get("truncation.n_cav").value_or("20"));
    cfg.n_trans = to_int("truncation.n_trans", m.get("truncation.n_trans").value_or("3"));
    if (auto v = m.get("truncation.auto_converge"))
        cfg.auto_converge = to_bool("truncation.auto_converge", *v);
    cfg.converge_tol = m.num("truncation.tol", 1e-4);

    cfg.omega_d = hz(m.num("drive.omega_d_hz", 0.0));
    const auto eps_v = m.get("drive.eps_hz");
    const auto pow_v = m.get("drive.power_dbm");
    if (eps_v && pow_v)
        throw ConfigError("config: specify exactly one of drive.eps_hz / drive.power_dbm");
    if (eps_v) cfg.eps = hz(to_double("drive.eps_hz", *eps_v));
    if (pow_v) cfg.power_dbm = to_double("drive.power_dbm", *pow_v);

    if (auto mode = m.get("calibration.mode")) {
        if (*mode == "auto") {
            cfg.calib_auto = true;
        } else if (*mode == "manual") {
            PowerCalibration c;
            c.eps_ref = hz(m.req("calibration.eps_ref_hz"));
            c.p_ref_dbm = m.req("calibration.p_ref_dbm");
            cfg.calib = c;
        } else {
            throw ConfigError("config: calibration.mode must be auto or manual");
        }
    } else if (kv.count("calibration.eps_ref_hz")) {
        PowerCalibration c;
        c.eps_ref = hz(m.req("calibration.eps_ref_hz"));
        c.p_ref_dbm = m.req("calibration.p_ref_dbm");
        cfg.calib = c;
    }

    cfg.rel_tol = m.num("solver.rel_tol", 1e-8);
    cfg.abs_tol = m.num("solver.abs_tol", 1e-12);
    cfg.t_max = m.num("solver.t_max_s", 0.0);
    cfg.n_times = to_int("solver.n_times", m.get("solver.n_times").value_or("200"));
    if (kv.count("solver.fit_t0_s")) cfg.fit_t0 = m.req("solver.fit_t0_s");
    if (auto v = m.get("solver.theta_list")) {
        std::istringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.thetas.push_back(to_double("solver.theta_list", trim(tok)));
    }

    for (const char* key : {"sweep.axis1", "sweep.axis2"})
        if (auto v = m.get(key)) cfg.axes.push_back(parse_axis(key, *v));
    if (cfg.axes.size() > 2) throw ConfigError("config: at most 2 sweep axes");
    bool axis_power = false, axis_eps = false;
    for (const auto& ax : cfg.axes) {
        axis_power |= ax.name == "power_dbm";
        axis_eps |= ax.name == "eps_hz";
    }
    if (axis_power && (axis_eps || cfg.eps))
        throw ConfigError("config: mixing eps_hz and power_dbm drive specifications");

    if (kv.count("boundary.omega_lo_hz")) {
        cfg.boundary.omega_lo = hz(m.req("boundary.omega_lo_hz"));
        cfg.boundary.omega_hi = hz(m.req("boundary.omega_hi_hz"));
        cfg.boundary.eps_lo = hz(m.req("boundary.eps_lo_hz"));
        cfg.boundary.eps_hi = hz(m.req("boundary.eps_hi_hz"));
        cfg.boundary.n_omega = to_int("boundary.n_omega",
                                      m.get("boundary.n_omega").value_or("50"));
        cfg.boundary.n_eps = to_int("boundary.n_eps", m.get("boundary.n_eps").value_or("50"));
        cfg.boundary.set = true;
    }

    cfg.workers = to_int("run.workers", m.get("run.workers").value_or("1"));
    cfg.seed = to_int("run.seed", m.get("run.seed").value_or("0"));
    if (cfg.workers < 1) throw ConfigError("config: run.workers must be >= 1");
    return cfg;
}

}  // namespace cqed
