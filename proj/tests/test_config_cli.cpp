#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cqed/config.hpp"
#include "cqed/io.hpp"

using namespace cqed;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path p = fs::current_path() / "config_cli_scratch";
    fs::create_directories(p);
    return p;
}

fs::path write_file(const std::string& name, const std::string& body) {
    fs::path p = scratch() / name;
    std::ofstream f(p);
    f << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const std::string kBaseConfig = R"([device]
omega_c_hz = 6.0e9
e_j_hz = 10.5e9
e_c_hz = 0.35e9   # transmon charging energy
g0_hz = 0.35e9
kappa_hz = 2.0e6
gamma_hz = 5.0e4
gamma_phi_hz = 2.0e4
n_c = 0.01
n_t = 0.02

[truncation]
n_cav = 12
n_trans = 3

[drive]
omega_d_hz = 6.11e9
eps_hz = 0.75e6

[solver]
t_max_s = 1e-5
n_times = 50

[run]
workers = 2
seed = 7
)";

#ifdef CQEDSIM_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(CQEDSIM_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}
#endif

}  // namespace

TEST_CASE("config loads with unit conversion and defaults") {
    fs::path p = write_file("base.cfg", kBaseConfig);
    RunConfig cfg = load_config(p.string());
    CHECK(cfg.dev.omega_c == doctest::Approx(kTwoPi * 6.0e9));
    CHECK(cfg.dev.E_C == doctest::Approx(kTwoPi * 0.35e9));  // comment stripped
    CHECK(cfg.dev.n_t == doctest::Approx(0.02));
    CHECK(cfg.n_cav == 12);
    CHECK(cfg.n_trans == 3);
    CHECK(cfg.omega_d == doctest::Approx(kTwoPi * 6.11e9));
    REQUIRE(cfg.eps.has_value());
    CHECK(*cfg.eps == doctest::Approx(kTwoPi * 0.75e6));
    CHECK(!cfg.power_dbm.has_value());
    CHECK(cfg.rel_tol == 1e-8);  // default
    CHECK(cfg.n_times == 50);
    CHECK(cfg.workers == 2);
    CHECK(cfg.seed == 7);
    CHECK(cfg.raw.at("device.n_c") == "0.01");
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(load_config((scratch() / "missing.cfg").string()), ConfigError);

    fs::path dup = write_file("dup.cfg", kBaseConfig + "\n[run]\nworkers = 3\n");
    CHECK_THROWS_AS(load_config(dup.string()), ConfigError);

    std::string both = kBaseConfig;
    both.replace(both.find("eps_hz = 0.75e6"), 15, "eps_hz = 0.75e6\npower_dbm = -20");
    CHECK_THROWS_AS(load_config(write_file("both.cfg", both).string()), ConfigError);

    fs::path keyless = write_file("keyless.cfg", "omega_c_hz = 6e9\n");
    CHECK_THROWS_AS(load_config(keyless.string()), ConfigError);

    fs::path nodev = write_file("nodev.cfg", "[run]\nworkers = 1\n");
    CHECK_THROWS_AS(load_config(nodev.string()), ConfigError);

    fs::path badax = write_file(
        "badax.cfg", kBaseConfig + "\n[sweep]\naxis1 = bogus_axis 1 2 5 lin\n");
    CHECK_THROWS_AS(load_config(badax.string()), ConfigError);

    fs::path mix = write_file(
        "mix.cfg", kBaseConfig + "\n[sweep]\naxis1 = power_dbm -30 -20 5 lin\n");
    CHECK_THROWS_AS(load_config(mix.string()), ConfigError);  // eps_hz also set
}

TEST_CASE("sweep axes parse with linear and log scales") {
    std::string body = kBaseConfig;
    body.erase(body.find("eps_hz = 0.75e6"), 15);
    body += "\n[sweep]\naxis1 = omega_d_hz 6.10e9 6.12e9 5 lin\naxis2 = eps_hz 1e5 1e6 4 log\n";
    RunConfig cfg = load_config(write_file("axes.cfg", body).string());
    REQUIRE(cfg.axes.size() == 2);
    CHECK(cfg.axes[0].name == "omega_d_hz");
    CHECK(cfg.axes[0].count == 5);
    CHECK(!cfg.axes[0].log);
    CHECK(cfg.axes[1].log);
}

TEST_CASE("manual calibration resolves powers to amplitudes") {
    std::string body = kBaseConfig;
    body.replace(body.find("eps_hz = 0.75e6"), 15, "power_dbm = -21");
    body += "\n[calibration]\nmode = manual\neps_ref_hz = 1.0e6\np_ref_dbm = -27\n";
    RunConfig cfg = load_config(write_file("calib.cfg", body).string());
    REQUIRE(cfg.power_dbm.has_value());
    CHECK(cfg.eps_from_power(*cfg.power_dbm) ==
          doctest::Approx(kTwoPi * 1.0e6 * std::pow(10.0, 6.0 / 20.0)));
    CHECK(cfg.eps_from_power(-27.0) == doctest::Approx(kTwoPi * 1.0e6));
}

TEST_CASE("effective-model section round-trips through the key map") {
    std::map<std::string, std::string> keys{
        {"duffing.omega_tilde_c_hz", "6.1146e9"}, {"duffing.kerr_hz", "-3.1e6"},
        {"duffing.kappa_tilde_hz", "1.9e6"},      {"duffing.kappa_tilde_phi_hz", "12.5"},
        {"duffing.n_tilde_c", "0.0099"},          {"duffing.eps_tilde_ratio", "0.982"},
        {"duffing.r_b", "-0.18"},                 {"duffing.r_nb", "0.031"}};
    DuffingParams p = duffing_from_keys(keys);
    CHECK(p.omega_tilde_c == doctest::Approx(kTwoPi * 6.1146e9));
    CHECK(p.kerr == doctest::Approx(kTwoPi * -3.1e6));
    CHECK(p.kappa_tilde == doctest::Approx(kTwoPi * 1.9e6));
    CHECK(p.kappa_tilde_phi == doctest::Approx(kTwoPi * 12.5));
    CHECK(p.n_tilde_c == doctest::Approx(0.0099));
    CHECK(p.r_a == doctest::Approx(0.982));  // defaults to the drive ratio
    CHECK(p.r_b == doctest::Approx(-0.18));

    CHECK_THROWS_AS(duffing_from_keys({{"duffing.kerr_hz", "-3e6"}}), ConfigError);
}

TEST_CASE("csv writer emits locale-independent minimal rows") {
    fs::path p = scratch() / "writer.csv";
    {
        CsvWriter w(p.string());
        w.header({"x_hz", "y_re", "y_im"});
        w.row({CsvWriter::num(1.5e9), CsvWriter::num(-0.125), CsvWriter::num(3.0)});
        CHECK_THROWS(w.row({"1", "2"}));  // column-count mismatch
    }
    CHECK(slurp(p) == "x_hz,y_re,y_im\n1500000000,-0.125,3\n");
}

#ifdef CQEDSIM_PATH

namespace {

const std::string kCliConfig = R"([duffing]
omega_tilde_c_hz = 6.1146e9
kerr_hz = -3.1e6
kappa_tilde_hz = 1.9e6
n_tilde_c = 0.01
eps_tilde_ratio = 0.98

[truncation]
n_cav = 10
n_trans = 2

[drive]
omega_d_hz = 6.106e9

[sweep]
axis1 = eps_hz 2.0e6 6.0e6 3 lin

[run]
workers = 2
)";

}  // namespace

TEST_CASE("cli spectrum run produces deterministic csv and a sidecar") {
    fs::path cfg = write_file("cli.cfg", kCliConfig);
    fs::path out1 = scratch() / "out1";
    fs::path out2 = scratch() / "out2";
    const std::string base =
        "spectrum --config " + cfg.string() + " --model duffing --workers 2 --out ";
    REQUIRE(run_cli(base + out1.string()) == 0);
    REQUIRE(run_cli(base + out2.string()) == 0);

    fs::path csv1 = out1 / "spectrum.csv";
    REQUIRE(fs::exists(csv1));
    REQUIRE(fs::exists(out1 / "spectrum.csv.meta.json"));
    const std::string body = slurp(csv1);
    CHECK(body.substr(0, body.find('\n')).find("omega_d_hz") != std::string::npos);
    // identical config => byte-identical table
    CHECK(body == slurp(out2 / "spectrum.csv"));
    // header + 3 sweep points
    CHECK(std::count(body.begin(), body.end(), '\n') == 4);

    const std::string meta = slurp(out1 / "spectrum.csv.meta.json");
    CHECK(meta.find("\"command\"") != std::string::npos);
    CHECK(meta.find("duffing.kerr_hz") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish config errors from bad usage") {
    fs::path out = scratch() / "err_out";
    CHECK(run_cli("spectrum --config /nonexistent.cfg --out " + out.string()) == 2);

    fs::path bad = write_file("bad.cfg", "[drive]\nomega_d_hz = 1e9\n");
    CHECK(run_cli("spectrum --config " + bad.string() + " --out " + out.string()) == 2);

    CHECK(run_cli("spectrum --out " + out.string()) == 2);        // missing --config
    CHECK(run_cli("not-a-subcommand --config x --out y") == 2);
    CHECK(run_cli("--help") == 0);
}

#endif  // CQEDSIM_PATH
