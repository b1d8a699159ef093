#include "dimer_cli/cli.hpp"

#include "dimer/dynamics.hpp"
#include "dimer/error.hpp"
#include "dimer/fit.hpp"
#include "dimer/io.hpp"
#include "dimer/lyapunov.hpp"
#include "dimer/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#ifndef DIMERLAB_VERSION
#define DIMERLAB_VERSION "0.0.0"
#endif

namespace dimer::cli {

namespace {

struct OptionSpec {
    const char* key;
    const char* default_value;  // nullptr: unset unless given
    const char* help;
};

struct CommandSpec {
    Command command;
    const char* name;
    const char* help;
    std::vector<OptionSpec> options;
};

const OptionSpec kV{"V", "0.5", "dimer potential strength, V > 0"};
const OptionSpec kP{"p", "0.5", "probability of a -V dimer, 0 < p < 1"};
const OptionSpec kSeed{"seed", "42", "master seed (64-bit)"};
const OptionSpec kFormat{"format", "csv", "csv | json"};
const OptionSpec kOut{"out", nullptr, "output file; a <out>.manifest.json is written next to it"};
const OptionSpec kThreads{"threads", "0", "worker threads, 0 = hardware concurrency"};
const OptionSpec kE{"E", nullptr, "energy"};

const std::vector<CommandSpec>& command_specs()
{
    static const std::vector<CommandSpec> specs{
        {Command::LyapunovScan,
         "lyapunov-scan",
         "Lyapunov exponent estimates over an energy grid",
         {kV, kP, kSeed, kFormat, kOut, kThreads,
          {"energies", nullptr, "energy grid a:b:count (or use --E)"},
          kE,
          {"steps", "1000000", "two-step transfer matrices per realization, >= 1000"},
          {"realizations", "20", "independent realizations per energy"}}},
        {Command::CriticalCheck,
         "critical-check",
         "exact criticality verdict for (V, E)",
         {kV, kP, kFormat, kOut, kE}},
        {Command::WalkStats,
         "walk-stats",
         "Monte Carlo statistics of the reduced walk at a critical couple",
         {kP, kSeed, kFormat, kOut, kThreads,
          {"couple", "half-sqrt2", "half-sqrt2 (V=1/sqrt2, E=-3/sqrt2) | sqrt2 (V=sqrt2, E=0)"},
          {"matrices", "1000", "matrices per trial, >= 1000"},
          {"trials", "10000", "independent trials, >= 100"}}},
        {Command::Dynamics,
         "dynamics",
         "spectrally projected moment series on a finite lattice",
         {kV, kP, kSeed, kFormat, kOut, kThreads,
          {"N", "1024", "lattice sites, even"},
          {"times", "1:1000:61", "log-spaced time grid a:b:count"},
          {"interval", "full", "spectral interval a:b | full"},
          {"q", "2", "moment order, q > 0"},
          {"psi", "delta", "initial state: delta | exp:theta"},
          {"realizations", "1", "disorder realizations averaged"},
          {"fit", nullptr, "time window a:b for a growth-exponent fit (reported in the manifest)"}}},
        {Command::Eigenstats,
         "eigenstats",
         "localization profiles of all eigenfunctions",
         {kV, kP, kSeed, kFormat, kOut,
          {"N", "1024", "lattice sites, even"},
          {"floor", "1e-12", "amplitude floor for decay fits, in (0, 1)"}}},
    };
    return specs;
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

double to_double(const std::string& text, const std::string& what)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw UsageError(what + ": expected a finite number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& text, const std::string& what)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw UsageError(what + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::size_t grid_count(const std::string& text, const std::string& what)
{
    const std::uint64_t n = to_u64(text, what);
    if (n < 1) {
        throw UsageError(what + ": count must be >= 1");
    }
    return static_cast<std::size_t>(n);
}

std::map<std::string, std::string> read_config_file(const std::string& path, const CommandSpec& spec)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("--config: cannot read '" + path + "'");
    }
    std::set<std::string> allowed;
    for (const OptionSpec& o : spec.options) {
        allowed.insert(o.key);
    }
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        const auto eq = body.find('=');
        const std::string where = "--config " + path + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw UsageError(where + ": expected key=value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (allowed.count(key) == 0) {
            throw UsageError(where + ": unknown key '" + key + "' for " + spec.name);
        }
        values[key] = trim(std::string_view(body).substr(eq + 1));
    }
    return values;
}

// Converts the merged string settings into a validated RunConfig.
RunConfig build_config(Command command, const std::map<std::string, std::string>& s)
{
    RunConfig cfg;
    cfg.command = command;
    cfg.settings = s;
    auto has = [&](const char* key) { return s.count(key) != 0; };
    auto get = [&](const char* key) { return s.at(key); };
    auto flag = [](const char* key) { return std::string("--") + key; };

    if (has("V")) {
        cfg.params.V = to_double(get("V"), flag("V"));
        if (!(cfg.params.V > 0.0)) {
            throw UsageError("--V: V must be > 0");
        }
    }
    if (has("p")) {
        cfg.params.p = to_double(get("p"), flag("p"));
        if (!(cfg.params.p > 0.0 && cfg.params.p < 1.0)) {
            throw UsageError("--p: p must lie in (0,1)");
        }
    }
    if (has("seed")) {
        cfg.seed = to_u64(get("seed"), flag("seed"));
    }
    if (has("format")) {
        const std::string f = get("format");
        if (f == "csv") {
            cfg.format = Format::Csv;
        } else if (f == "json") {
            cfg.format = Format::Json;
        } else {
            throw UsageError("--format: expected csv or json, got '" + f + "'");
        }
    }
    if (has("out")) {
        if (get("out").empty()) {
            throw UsageError("--out: empty path");
        }
        cfg.out = get("out");
    }
    if (has("threads")) {
        cfg.threads = static_cast<unsigned>(to_u64(get("threads"), flag("threads")));
    }

    switch (command) {
    case Command::LyapunovScan:
        if (has("energies") == has("E")) {
            throw UsageError("--energies: give exactly one of --energies or --E");
        }
        if (has("energies")) {
            try {
                cfg.energies = parse_linear_grid(get("energies"));
            } catch (const UsageError& e) {
                throw UsageError(std::string("--energies: ") + e.what());
            }
        } else {
            cfg.energies = {to_double(get("E"), flag("E"))};
        }
        cfg.steps = static_cast<std::size_t>(to_u64(get("steps"), flag("steps")));
        if (cfg.steps < 1000) {
            throw UsageError("--steps: must be >= 1000");
        }
        cfg.realizations = static_cast<std::size_t>(to_u64(get("realizations"), flag("realizations")));
        if (cfg.realizations < 1) {
            throw UsageError("--realizations: must be >= 1");
        }
        break;
    case Command::CriticalCheck:
        if (!has("E")) {
            throw UsageError("--E: required by critical-check");
        }
        cfg.energies = {to_double(get("E"), flag("E"))};
        break;
    case Command::WalkStats: {
        const std::string c = get("couple");
        if (c == "half-sqrt2") {
            cfg.couple = CriticalCouple::HalfSqrt2;
        } else if (c == "sqrt2") {
            cfg.couple = CriticalCouple::Sqrt2;
        } else {
            throw UsageError("--couple: expected half-sqrt2 or sqrt2, got '" + c + "'");
        }
        cfg.matrices = static_cast<std::size_t>(to_u64(get("matrices"), flag("matrices")));
        if (cfg.matrices < 1000) {
            throw UsageError("--matrices: must be >= 1000");
        }
        cfg.trials = static_cast<std::size_t>(to_u64(get("trials"), flag("trials")));
        if (cfg.trials < 100) {
            throw UsageError("--trials: must be >= 100");
        }
        break;
    }
    case Command::Dynamics:
    case Command::Eigenstats: {
        cfg.n_sites = static_cast<std::size_t>(to_u64(get("N"), flag("N")));
        if (cfg.n_sites < 2 || cfg.n_sites % 2 != 0) {
            throw UsageError("--N: must be even and >= 2");
        }
        if (command == Command::Eigenstats) {
            cfg.floor = to_double(get("floor"), flag("floor"));
            if (!(cfg.floor > 0.0 && cfg.floor < 1.0)) {
                throw UsageError("--floor: must lie in (0,1)");
            }
            break;
        }
        try {
            cfg.times = parse_log_grid(get("times"));
        } catch (const UsageError& e) {
            throw UsageError(std::string("--times: ") + e.what());
        }
        const std::string iv = get("interval");
        if (iv == "full") {
            const double b = cfg.params.V + 2.0;
            cfg.interval = {-b, b};
        } else {
            try {
                cfg.interval = parse_interval(iv);
            } catch (const UsageError& e) {
                throw UsageError(std::string("--interval: ") + e.what());
            }
        }
        cfg.q = to_double(get("q"), flag("q"));
        if (!(cfg.q > 0.0)) {
            throw UsageError("--q: must be > 0");
        }
        const std::string psi = get("psi");
        if (psi == "delta") {
            cfg.psi = {};
        } else if (psi.rfind("exp:", 0) == 0) {
            cfg.psi.exponential = true;
            cfg.psi.theta = to_double(psi.substr(4), flag("psi"));
            if (!(cfg.psi.theta > 0.0)) {
                throw UsageError("--psi: theta must be > 0");
            }
        } else {
            throw UsageError("--psi: expected delta or exp:theta, got '" + psi + "'");
        }
        cfg.realizations = static_cast<std::size_t>(to_u64(get("realizations"), flag("realizations")));
        if (cfg.realizations < 1) {
            throw UsageError("--realizations: must be >= 1");
        }
        if (has("fit")) {
            Interval w;
            try {
                w = parse_interval(get("fit"));
            } catch (const UsageError& e) {
                throw UsageError(std::string("--fit: ") + e.what());
            }
            const auto inside =
                std::count_if(cfg.times.begin(), cfg.times.end(), [&](double t) { return w.contains(t); });
            if (!(w.lo > 0.0) || inside < 8) {
                throw UsageError("--fit: window must be positive and hold at least 8 grid times");
            }
            cfg.fit_window = w;
        }
        break;
    }
    }
    return cfg;
}

struct Output {
    std::string content;
    nlohmann::json summary = nlohmann::json::object();
};

Output compute(const RunConfig& cfg)
{
    Output o;
    const bool json = cfg.format == Format::Json;
    switch (cfg.command) {
    case Command::LyapunovScan: {
        GammaOptions options;
        options.threads = cfg.threads;
        const auto rows = scan_gamma(cfg.params, cfg.energies, cfg.steps, cfg.realizations, cfg.seed, options);
        o.content = json ? scan_to_json(cfg.params, rows) : scan_to_csv(cfg.params, rows);
        o.summary["n_energies"] = rows.size();
        break;
    }
    case Command::CriticalCheck: {
        const double e = cfg.energies.front();
        const CriticalityReport report = classify_criticality(cfg.params, e);
        o.content = json ? criticality_to_json(cfg.params, e, report) : criticality_to_csv(cfg.params, e, report);
        o.summary["verdict"] = to_string(report.verdict);
        break;
    }
    case Command::WalkStats: {
        WalkOptions options;
        options.threads = cfg.threads;
        const WalkStats stats = simulate_walk(cfg.couple, cfg.params.p, cfg.matrices, cfg.trials, cfg.seed, options);
        o.content = json ? walk_stats_to_json(stats) : walk_stats_to_csv(stats);
        double worst = 0.0;
        for (const WalkStat& s : stats.stats) {
            worst = std::max(worst, std::abs(s.z_score()));
        }
        o.summary["max_abs_z"] = worst;
        break;
    }
    case Command::Dynamics: {
        const std::size_t x0 = cfg.n_sites / 2;
        const InitialState psi = cfg.psi.exponential ? InitialState::exponential(cfg.n_sites, x0, cfg.psi.theta)
                                                     : InitialState::delta(cfg.n_sites, x0);
        const MomentSeries series = ensemble_moment_series(cfg.params, cfg.n_sites, cfg.seed, cfg.realizations,
                                                           psi.amplitudes, cfg.interval, cfg.q, cfg.times, cfg.threads);
        o.content = json ? moment_series_to_json(series) : moment_series_to_csv(series);
        o.summary["sup_value"] = series.sup_value;
        const double t_end = cfg.times.back();
        if (t_end / 10.0 >= cfg.times.front()) {
            o.summary["last_decade_plateau_ratio"] = plateau_ratio(series, {t_end / 10.0, t_end});
        }
        if (cfg.fit_window) {
            const GrowthFit fit = fit_growth_exponent(series, *cfg.fit_window);
            o.summary["growth_fit"] = {{"window", {cfg.fit_window->lo, cfg.fit_window->hi}},
                                       {"slope", fit.slope},
                                       {"slope_stderr", fit.slope_stderr},
                                       {"ci95", {fit.ci95_lo, fit.ci95_hi}},
                                       {"r2", fit.r2},
                                       {"n_points", fit.n_points}};
        }
        break;
    }
    case Command::Eigenstats: {
        const DisorderRealization w =
            sample_disorder(cfg.params, cfg.n_sites / 2, derive_seed(cfg.seed, 0));
        const SpectralData sd = diagonalize(w, cfg.n_sites);
        const auto profiles = localization_profiles(sd, cfg.floor);
        o.content = json ? profiles_to_json(profiles) : profiles_to_csv(profiles);
        std::vector<double> rates;
        std::size_t degenerate = 0;
        for (const LocalizationProfile& p : profiles) {
            if (p.degenerate) {
                ++degenerate;
            } else if (std::isfinite(p.decay_rate)) {
                rates.push_back(p.decay_rate);
            }
        }
        o.summary["n_profiles"] = profiles.size();
        o.summary["n_degenerate"] = degenerate;
        if (!rates.empty()) {
            o.summary["median_decay_rate"] = median(rates);
        }
        break;
    }
    }
    return o;
}

} // namespace

const char* to_string(Command c) noexcept
{
    switch (c) {
    case Command::LyapunovScan: return "lyapunov-scan";
    case Command::CriticalCheck: return "critical-check";
    case Command::WalkStats: return "walk-stats";
    case Command::Dynamics: return "dynamics";
    case Command::Eigenstats: return "eigenstats";
    }
    return "?";
}

std::vector<double> parse_linear_grid(const std::string& spec)
{
    const auto parts = split(spec, ':');
    if (parts.size() != 3) {
        throw UsageError("expected a:b:count, got '" + spec + "'");
    }
    const double a = to_double(parts[0], "grid start");
    const double b = to_double(parts[1], "grid end");
    const std::size_t n = grid_count(parts[2], "grid count");
    if (n == 1) {
        return {a};
    }
    if (!(a < b)) {
        throw UsageError("grid needs a < b when count > 1");
    }
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.back() = b;
    return grid;
}

std::vector<double> parse_log_grid(const std::string& spec)
{
    const auto parts = split(spec, ':');
    if (parts.size() != 3) {
        throw UsageError("expected a:b:count, got '" + spec + "'");
    }
    const double a = to_double(parts[0], "grid start");
    const double b = to_double(parts[1], "grid end");
    const std::size_t n = grid_count(parts[2], "grid count");
    if (!(a > 0.0 && a < b) || n < 2) {
        throw UsageError("log grid needs 0 < a < b and count >= 2");
    }
    return log_spaced(a, b, n);
}

Interval parse_interval(const std::string& spec)
{
    const auto parts = split(spec, ':');
    if (parts.size() != 2) {
        throw UsageError("expected a:b, got '" + spec + "'");
    }
    const Interval iv{to_double(parts[0], "interval start"), to_double(parts[1], "interval end")};
    if (!(iv.lo <= iv.hi)) {
        throw UsageError("interval needs a <= b");
    }
    return iv;
}

RunConfig parse(const std::vector<std::string>& args)
{
    CLI::App app{"dimerlab: random dimer model laboratory", "dimerlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DIMERLAB_VERSION);

    struct Bound {
        const CommandSpec* spec;
        CLI::App* sub;
        std::map<std::string, std::string> given;
        std::map<std::string, CLI::Option*> options;
        std::string config;
        CLI::Option* config_option = nullptr;
    };
    std::vector<Bound> bound(command_specs().size());
    for (std::size_t i = 0; i < bound.size(); ++i) {
        Bound& b = bound[i];
        b.spec = &command_specs()[i];
        b.sub = app.add_subcommand(b.spec->name, b.spec->help);
        for (const OptionSpec& o : b.spec->options) {
            std::string help = o.help;
            if (o.default_value != nullptr) {
                help += " [default " + std::string(o.default_value) + "]";
            }
            b.options[o.key] = b.sub->add_option(std::string("--") + o.key, b.given[o.key], help);
        }
        b.config_option = b.sub->add_option("--config", b.config, "flat key=value file; flags override it");
    }

    if (!args.empty() && !args.front().starts_with("-")) {
        const bool known = std::any_of(command_specs().begin(), command_specs().end(),
                                       [&](const CommandSpec& c) { return args.front() == c.name; });
        if (!known) {
            throw UsageError("unknown command '" + args.front() + "'");
        }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw;
    } catch (const CLI::CallForVersion&) {
        throw;
    } catch (const CLI::ExtrasError&) {
        std::string extras;
        for (const Bound& b : bound) {
            for (const std::string& a : b.sub->remaining()) {
                extras += (extras.empty() ? "" : " ") + a;
            }
        }
        for (const std::string& a : app.remaining()) {
            extras += (extras.empty() ? "" : " ") + a;
        }
        throw UsageError("unrecognized arguments: " + extras);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    for (Bound& b : bound) {
        if (!b.sub->parsed()) {
            continue;
        }
        std::map<std::string, std::string> settings;
        for (const OptionSpec& o : b.spec->options) {
            if (o.default_value != nullptr) {
                settings[o.key] = o.default_value;
            }
        }
        if (b.config_option->count() > 0) {
            for (auto& [k, v] : read_config_file(b.config, *b.spec)) {
                settings[k] = v;
            }
        }
        for (const OptionSpec& o : b.spec->options) {
            if (b.options[o.key]->count() > 0) {
                settings[o.key] = b.given[o.key];
            }
        }
        return build_config(b.spec->command, settings);
    }
    throw UsageError("a command is required");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    const auto start = std::chrono::steady_clock::now();
    Output result;
    try {
        result = compute(config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    if (!config.out) {
        out << result.content;
        return 0;
    }
    try {
        const std::string manifest_path = *config.out + ".manifest.json";
        write_file_atomic(*config.out, result.content);
        nlohmann::ordered_json m;
        m["schema_version"] = kSchemaVersion;
        m["command"] = to_string(config.command);
        m["version"] = DIMERLAB_VERSION;
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config.settings) {
            params[k] = v;
        }
        m["params"] = params;
        if (config.settings.count("seed") != 0) {
            m["seed"] = config.seed;
        }
        m["outputs"] = {*config.out};
        m["summary"] = result.summary;
        m["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file_atomic(manifest_path, m.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig config;
    try {
        config = parse(args);
    } catch (const CLI::CallForHelp&) {
        out << "usage: dimerlab <command> [--flag value ...] [--config file]\n\ncommands:\n";
        for (const CommandSpec& s : command_specs()) {
            out << "  " << s.name << "  " << s.help << '\n';
            for (const OptionSpec& o : s.options) {
                out << "      --" << o.key << "  " << o.help;
                if (o.default_value != nullptr) {
                    out << " [default " << o.default_value << ']';
                }
                out << '\n';
            }
        }
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << DIMERLAB_VERSION << '\n';
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }
    return run(config, out, err);
}

} // namespace dimer::cli
