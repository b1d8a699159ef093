#pragma once

#include "dimer/criticalwalk.hpp"
#include "dimer/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimer::cli {

/// Bad flags, values or config files. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { LyapunovScan, CriticalCheck, WalkStats, Dynamics, Eigenstats };

const char* to_string(Command c) noexcept;

enum class Format { Csv, Json };

struct InitialStateSpec {
    bool exponential = false;
    double theta = 0.0;
};

struct RunConfig {
    Command command = Command::LyapunovScan;
    DimerParams params;
    std::uint64_t seed = 42;
    Format format = Format::Csv;
    std::optional<std::string> out;
    unsigned threads = 0;

    // lyapunov-scan, critical-check
    std::vector<double> energies;
    std::size_t steps = 1000000;
    std::size_t realizations = 20;

    // walk-stats
    CriticalCouple couple = CriticalCouple::HalfSqrt2;
    std::size_t matrices = 1000;
    std::size_t trials = 10000;

    // dynamics, eigenstats
    std::size_t n_sites = 1024;
    std::vector<double> times;
    Interval interval;
    double q = 2.0;
    InitialStateSpec psi;
    std::optional<Interval> fit_window;
    double floor = 1e-12;

    /// Effective option values (defaults, then config file, then flags), keyed by flag name.
    std::map<std::string, std::string> settings;
};

/// Parses argv-style arguments (without the program name). Throws UsageError.
RunConfig parse(const std::vector<std::string>& args);

/// Runs a parsed configuration. Results go to config.out (plus a manifest
/// at <out>.manifest.json) or to `out` when no path is given. Returns the
/// process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse + run with exit codes 0 (success), 1 (computation error) and 2 (usage error).
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a:b:count" -> count evenly spaced points from a to b inclusive.
std::vector<double> parse_linear_grid(const std::string& spec);
/// "a:b:count" -> count geometrically spaced points (0 < a < b, count >= 2).
std::vector<double> parse_log_grid(const std::string& spec);
/// "a:b" with a <= b.
Interval parse_interval(const std::string& spec);

} // namespace dimer::cli
