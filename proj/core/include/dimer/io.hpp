#pragma once

#include "dimer/criticalwalk.hpp"
#include "dimer/dynamics.hpp"
#include "dimer/lyapunov.hpp"
#include "dimer/model.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace dimer {

/// Version stamped into every JSON document and the run manifest.
inline constexpr int kSchemaVersion = 1;

/// Locale-independent, '.' decimal, 17 significant digits.
std::string format_real(double x);

/// {"schema_version", "seed", "V", "p", "n_dimers", "values": [...]}.
std::string realization_to_json(const DisorderRealization& w);
/// Throws InvalidArgument on malformed input or values other than +-V.
DisorderRealization realization_from_json(std::string_view text);

/// Columns: E,gamma_per_dimer,gamma_per_site,std_error,n_steps,n_realizations,verdict.
std::string scan_to_csv(const DimerParams& params, std::span<const LyapunovEstimate> rows);
std::string scan_to_json(const DimerParams& params, std::span<const LyapunovEstimate> rows);

std::string criticality_to_json(const DimerParams& params, double energy, const CriticalityReport& report);
std::string criticality_to_csv(const DimerParams& params, double energy, const CriticalityReport& report);

/// {"schema_version", "couple", "p", ..., "stats": {name: {empirical, theoretical, sigma}}}.
std::string walk_stats_to_json(const WalkStats& stats);
/// Columns: statistic,empirical,theoretical,sigma.
std::string walk_stats_to_csv(const WalkStats& stats);

/// Columns: t,r,q,interval_lo,interval_hi,sup_value.
std::string moment_series_to_csv(const MomentSeries& series);
std::string moment_series_to_json(const MomentSeries& series);

/// Columns: index,energy,center,decay_rate,fit_r2,support,degenerate.
std::string profiles_to_csv(std::span<const LocalizationProfile> profiles);
std::string profiles_to_json(std::span<const LocalizationProfile> profiles);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace dimer
