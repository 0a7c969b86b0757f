// Flat-sectioned key/value run configuration. All frequencies are entered
// as value/2pi in Hz and converted to angular units at this boundary; powers
// are entered in dBm and mapped through the calibration block.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqed/duffing.hpp"
#include "cqed/gjc.hpp"
#include "cqed/transmon.hpp"

namespace cqed {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AxisSpec {
    std::string name;  // omega_d_hz | eps_hz | power_dbm
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool log = false;
};

struct BoundaryRange {
    double omega_lo = 0.0, omega_hi = 0.0;  // rad/s
    double eps_lo = 0.0, eps_hi = 0.0;      // rad/s
    int n_omega = 50, n_eps = 50;
    bool set = false;
};

struct RunConfig {
    DeviceParams dev;  // angular units
    std::optional<DuffingParams> duffing;  // explicit effective model, if given

    int n_cav = 20;
    int n_trans = 3;
    bool auto_converge = false;
    double converge_tol = 1e-4;

    double omega_d = 0.0;                   // rad/s
    std::optional<double> eps;              // rad/s
    std::optional<double> power_dbm;
    std::optional<PowerCalibration> calib;  // rad/s amplitudes
    bool calib_auto = false;

    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double t_max = 0.0;  // s
    int n_times = 200;
    std::optional<double> fit_t0;  // s; default 5 max(T_kappa, T_1)
    std::vector<double> thetas;    // transient initial transmon angles

    std::vector<AxisSpec> axes;  // at most 2
    BoundaryRange boundary;
    int workers = 1;
    int seed = 0;

    // every resolved "section.key = value" pair, for the metadata sidecar
    std::map<std::string, std::string> raw;

    // drive amplitude at a grid point, resolving dBm through the calibration
    double eps_from_power(double p_dbm) const;
};

RunConfig load_config(const std::string& path);

// Parses the [duffing] section keys from a flat map (used both by the config
// loader and for round-tripping duffing-project JSON output).
DuffingParams duffing_from_keys(const std::map<std::string, std::string>& keys);

}  // namespace cqed
