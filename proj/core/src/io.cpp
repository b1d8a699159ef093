#include "dimer/io.hpp"

#include "dimer/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace dimer {

using nlohmann::json;

namespace {

// JSON has no NaN/Inf; they become null.
json real_json(double x)
{
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

json spectral_class_json(const SpectralClass& c)
{
    return {{"kind", to_string(c.kind)}, {"trace", real_json(c.trace)}, {"spectral_radius", real_json(c.spectral_radius)}};
}

json estimate_json(const DimerParams& params, const LyapunovEstimate& e)
{
    return {{"E", real_json(e.energy)},
            {"gamma_per_dimer", real_json(e.gamma_per_dimer)},
            {"gamma_per_site", real_json(e.gamma_per_site)},
            {"std_error", real_json(e.std_error)},
            {"n_steps", e.n_steps},
            {"n_realizations", e.n_realizations},
            {"verdict", to_string(classify_criticality(params, e.energy).verdict)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

std::string format_real(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string realization_to_json(const DisorderRealization& w)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = w.seed();
    j["V"] = w.params().V;
    j["p"] = w.params().p;
    j["n_dimers"] = w.n_dimers();
    j["values"] = std::vector<double>(w.dimer_values().begin(), w.dimer_values().end());
    return dump(j);
}

DisorderRealization realization_from_json(std::string_view text)
{
    try {
        const json j = json::parse(text);
        DimerParams params{j.at("V").get<double>(), j.at("p").get<double>()};
        auto values = j.at("values").get<std::vector<double>>();
        const auto n = j.at("n_dimers").get<std::size_t>();
        if (values.size() != n) {
            throw InvalidArgument("realization_from_json: n_dimers does not match the values array");
        }
        return DisorderRealization(params, j.at("seed").get<std::uint64_t>(), std::move(values));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("realization_from_json: ") + e.what());
    }
}

std::string scan_to_csv(const DimerParams& params, std::span<const LyapunovEstimate> rows)
{
    std::ostringstream os;
    os << "E,gamma_per_dimer,gamma_per_site,std_error,n_steps,n_realizations,verdict\n";
    for (const auto& e : rows) {
        os << format_real(e.energy) << ',' << format_real(e.gamma_per_dimer) << ',' << format_real(e.gamma_per_site)
           << ',' << format_real(e.std_error) << ',' << e.n_steps << ',' << e.n_realizations << ','
           << to_string(classify_criticality(params, e.energy).verdict) << '\n';
    }
    return os.str();
}

std::string scan_to_json(const DimerParams& params, std::span<const LyapunovEstimate> rows)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["V"] = params.V;
    j["p"] = params.p;
    j["rows"] = json::array();
    for (const auto& e : rows) {
        j["rows"].push_back(estimate_json(params, e));
    }
    return dump(j);
}

std::string criticality_to_json(const DimerParams& params, double energy, const CriticalityReport& report)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["V"] = params.V;
    j["p"] = params.p;
    j["E"] = energy;
    j["verdict"] = to_string(report.verdict);
    j["matched_condition"] = report.matched_condition;
    j["alpha"] = report.alpha;
    j["beta"] = report.beta;
    j["class_alpha"] = spectral_class_json(report.class_alpha);
    j["class_beta"] = spectral_class_json(report.class_beta);
    return dump(j);
}

std::string criticality_to_csv(const DimerParams& params, double energy, const CriticalityReport& report)
{
    std::ostringstream os;
    os << "V,E,verdict,matched_condition,alpha,beta,class_alpha,class_beta\n";
    os << format_real(params.V) << ',' << format_real(energy) << ',' << to_string(report.verdict) << ",\""
       << report.matched_condition << "\"," << format_real(report.alpha) << ',' << format_real(report.beta) << ','
       << to_string(report.class_alpha.kind) << ',' << to_string(report.class_beta.kind) << '\n';
    return os.str();
}

std::string walk_stats_to_json(const WalkStats& stats)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["couple"] = to_string(stats.couple);
    j["p"] = stats.p;
    j["n_matrices"] = stats.n_matrices;
    j["n_trials"] = stats.n_trials;
    j["seed"] = stats.seed;
    json s = json::object();
    for (const auto& st : stats.stats) {
        s[st.name] = {{"empirical", real_json(st.empirical)},
                      {"theoretical", real_json(st.theoretical)},
                      {"sigma", real_json(st.sigma)}};
    }
    j["stats"] = s;
    return dump(j);
}

std::string walk_stats_to_csv(const WalkStats& stats)
{
    std::ostringstream os;
    os << "statistic,empirical,theoretical,sigma\n";
    for (const auto& st : stats.stats) {
        os << '"' << st.name << "\"," << format_real(st.empirical) << ',' << format_real(st.theoretical) << ','
           << format_real(st.sigma) << '\n';
    }
    return os.str();
}

std::string moment_series_to_csv(const MomentSeries& series)
{
    std::ostringstream os;
    os << "t,r,q,interval_lo,interval_hi,sup_value\n";
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        os << format_real(series.times[i]) << ',' << format_real(series.values[i]) << ',' << format_real(series.q)
           << ',' << format_real(series.interval.lo) << ',' << format_real(series.interval.hi) << ','
           << format_real(series.sup_value) << '\n';
    }
    return os.str();
}

std::string moment_series_to_json(const MomentSeries& series)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["q"] = series.q;
    j["interval"] = {series.interval.lo, series.interval.hi};
    j["times"] = series.times;
    j["values"] = series.values;
    j["sup_value"] = series.sup_value;
    return dump(j);
}

std::string profiles_to_csv(std::span<const LocalizationProfile> profiles)
{
    std::ostringstream os;
    os << "index,energy,center,decay_rate,fit_r2,support,degenerate\n";
    for (const auto& p : profiles) {
        os << p.index << ',' << format_real(p.energy) << ',' << p.center << ',' << format_real(p.decay_rate) << ','
           << format_real(p.fit_r2) << ',' << p.support << ',' << (p.degenerate ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string profiles_to_json(std::span<const LocalizationProfile> profiles)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["profiles"] = json::array();
    for (const auto& p : profiles) {
        j["profiles"].push_back({{"index", p.index},
                                 {"energy", real_json(p.energy)},
                                 {"center", p.center},
                                 {"decay_rate", real_json(p.decay_rate)},
                                 {"fit_r2", real_json(p.fit_r2)},
                                 {"support", p.support},
                                 {"degenerate", p.degenerate}});
    }
    return dump(j);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("write_file_atomic: cannot open " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error("write_file_atomic: write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("write_file_atomic: rename to " + path.string() + " failed: " + ec.message());
    }
}

} // namespace dimer
