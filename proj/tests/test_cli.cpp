#include "dimer_cli/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dimer;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path tmp_dir()
{
    const fs::path dir = DIMERLAB_TEST_TMP;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("lyapunov-scan writes CSV and a manifest")
{
    const fs::path out = tmp_dir() / "scan.csv";
    const Result r = run_cli({"lyapunov-scan", "--V", "0.5", "--p", "0.5", "--energies", "-1:1:5", "--steps", "1000",
                              "--realizations", "2", "--seed", "7", "--out", out.string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("E,gamma_per_dimer,gamma_per_site,std_error,n_steps,n_realizations,verdict\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m["command"] == "lyapunov-scan");
    CHECK(m["seed"] == 7);
    CHECK(m["params"]["V"] == "0.5");
    CHECK(m["summary"]["n_energies"] == 5);
    CHECK(m["outputs"][0] == out.string());
    CHECK(m.contains("wall_time"));
    CHECK(m.contains("schema_version"));

    // The rerun is byte-identical.
    const fs::path again = tmp_dir() / "scan2.csv";
    REQUIRE(run_cli({"lyapunov-scan", "--V", "0.5", "--p", "0.5", "--energies", "-1:1:5", "--steps", "1000",
                     "--realizations", "2", "--seed", "7", "--out", again.string()})
                .code == 0);
    CHECK(slurp(again) == csv);
}

TEST_CASE("results go to stdout without --out")
{
    const Result r = run_cli({"lyapunov-scan", "--E", "0.3", "--steps", "1000", "--realizations", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("E,gamma_per_dimer", 0) == 0);
}

TEST_CASE("invalid p is a usage error")
{
    const Result r = run_cli({"lyapunov-scan", "--p", "1.5", "--E", "0"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--p") != std::string::npos);
    CHECK(r.err.find("p must lie in (0,1)") != std::string::npos);
}

TEST_CASE("usage errors")
{
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"lyapunov-scan", "--E", "0", "--bogus", "1"}).code == 2);
    CHECK(run_cli({"critical-check"}).code == 2);
    CHECK(run_cli({"critical-check", "--E", "0", "--steps", "1000"}).code == 2);
    CHECK(run_cli({"lyapunov-scan", "--E", "0", "--steps", "10"}).code == 2);
    CHECK(run_cli({"lyapunov-scan", "--V", "0", "--E", "0"}).code == 2);
    CHECK(run_cli({"dynamics", "--N", "7"}).code == 2);
    CHECK(run_cli({"dynamics", "--interval", "2:1"}).code == 2);
    CHECK(run_cli({"dynamics", "--psi", "gauss"}).code == 2);
    CHECK(run_cli({"walk-stats", "--couple", "sqrt3"}).code == 2);
}

TEST_CASE("config file and flag precedence")
{
    const fs::path cfg = tmp_dir() / "scan.cfg";
    {
        std::ofstream f(cfg);
        f << "# scan settings\nV = 0.5\nseed = 9\nsteps=1000\nrealizations = 1\nE = 0.25\n";
    }
    const auto with_flag = cli::parse({"lyapunov-scan", "--config", cfg.string(), "--seed", "42"});
    CHECK(with_flag.seed == 42);
    CHECK(with_flag.params.V == 0.5);
    CHECK(with_flag.steps == 1000);
    CHECK(cli::parse({"lyapunov-scan", "--config", cfg.string()}).seed == 9);

    const fs::path bad = tmp_dir() / "bad.cfg";
    {
        std::ofstream f(bad);
        f << "V = 0.5\ncolour = blue\n";
    }
    const Result r = run_cli({"lyapunov-scan", "--config", bad.string(), "--E", "0"});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown key 'colour'") != std::string::npos);
    CHECK(r.err.find(":2:") != std::string::npos);
}

TEST_CASE("critical-check JSON")
{
    const Result r = run_cli({"critical-check", "--V", "0.7071067811865476", "--E", "-2.1213203435596424", "--format",
                              "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["verdict"] == "WalkCritical");
    CHECK(j["matched_condition"] == "beta^2=2, alpha=2*beta");

    const auto s2 = nlohmann::json::parse(
        run_cli({"critical-check", "--V", "1.4142135623730951", "--E", "0", "--format", "json"}).out);
    CHECK(s2["verdict"] == "WalkCritical");
    const auto res = nlohmann::json::parse(run_cli({"critical-check", "--V", "0.5", "--E", "0.5", "--format", "json"}).out);
    CHECK(res["verdict"] == "ResonanceCritical");
}

TEST_CASE("dynamics CSV carries interval and sup columns")
{
    const fs::path out = tmp_dir() / "dyn.csv";
    const Result r = run_cli({"dynamics", "--V", "0.5", "--N", "128", "--times", "1:100:12", "--interval",
                              "-0.6:-0.4", "--fit", "1:100", "--out", out.string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("t,r,q,interval_lo,interval_hi,sup_value\n", 0) == 0);
    CHECK(csv.find(",-0.59999999999999998,-0.40000000000000002,") != std::string::npos);
    const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m["summary"].contains("sup_value"));
    CHECK(m["summary"].contains("last_decade_plateau_ratio"));
    CHECK(m["summary"]["growth_fit"]["n_points"] == 12);
}

TEST_CASE("computation errors exit with 1")
{
    // No eigenvalue lies in the interval, so r(t) = 0 and the fit has no positive values.
    const Result r = run_cli({"dynamics", "--N", "64", "--times", "1:100:10", "--interval", "10:11", "--fit", "1:100"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("walk-stats and eigenstats")
{
    const Result w = run_cli({"walk-stats", "--p", "0.5", "--matrices", "1000", "--trials", "200", "--format", "json"});
    REQUIRE(w.code == 0);
    CHECK(nlohmann::json::parse(w.out)["stats"].contains("P(eps=+1)"));
    const Result e = run_cli({"eigenstats", "--V", "2", "--N", "64"});
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("index,energy,center,decay_rate,fit_r2,support,degenerate\n", 0) == 0);
}

TEST_CASE("grid parsers")
{
    CHECK(cli::parse_linear_grid("0:1:3") == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(cli::parse_linear_grid("0.25:1:1") == std::vector<double>{0.25});
    CHECK_THROWS_AS(cli::parse_linear_grid("1:0:3"), cli::UsageError);
    CHECK_THROWS_AS(cli::parse_linear_grid("a:b:c"), cli::UsageError);
    const auto g = cli::parse_log_grid("1:100:3");
    CHECK(g[1] == doctest::Approx(10.0));
    CHECK_THROWS_AS(cli::parse_log_grid("0:1:3"), cli::UsageError);
    CHECK(cli::parse_interval("-1:2") == Interval{-1.0, 2.0});
    CHECK_THROWS_AS(cli::parse_interval("2:1"), cli::UsageError);
}

TEST_CASE("help and version")
{
    const Result h = run_cli({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("lyapunov-scan") != std::string::npos);
    const Result v = run_cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == "0.1.0\n");
}
