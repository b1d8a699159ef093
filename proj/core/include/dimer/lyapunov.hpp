#pragma once

#include "dimer/mat2.hpp"
#include "dimer/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dimer {

/// Lyapunov exponent estimate. The per-dimer value counts two-step transfer
/// matrices; the per-site value is half of it.
struct LyapunovEstimate {
    double energy = 0.0;
    double gamma_per_dimer = 0.0;
    double gamma_per_site = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_realizations = 0;
    double std_error = 0.0;
};

/// How the random product is evaluated.
///
/// At the walk-critical couples the parameters (V = sqrt(2) or 1/sqrt(2))
/// are not representable in floating point, and the exact cancellations that
/// make the exponent vanish are destroyed by rounding, amplified by
/// lambda^{2|V_k|}. ExactCritical reduces the product symbolically to
/// +-T_beta^u T_alpha^V (or +-(T_alpha T_beta)^V) with integer bookkeeping
/// and evaluates its log-norm in closed form.
enum class ProductEvaluation {
    Auto,           ///< ExactCritical when classify_criticality reports WalkCritical, else Floating
    Floating,       ///< renormalized floating-point products
    ExactCritical,  ///< symbolic reduction; requires a walk-critical (V, E)
};

struct GammaOptions {
    Vec2 initial{1.0, 0.0};
    unsigned threads = 0;
    ProductEvaluation evaluation = ProductEvaluation::Auto;
};

/// Sum of ln ||T w|| over the transfer matrices of `dimer_values`, starting
/// from `initial` and renormalizing after every step. Equals ln ||T_n...T_1 w0|| - ln ||w0||.
double accumulate_log_growth(std::span<const double> dimer_values, double energy, Vec2 initial = {1.0, 0.0});

/// Same accumulation, drawing n_steps dimers from the stream `seed`
/// (identical to running on sample_disorder(params, n_steps, seed)).
double accumulate_log_growth(const DimerParams& params, double energy, std::size_t n_steps,
                             std::uint64_t seed, Vec2 initial = {1.0, 0.0});

/// ln ||T_n...T_1 w0|| - ln ||w0|| at a walk-critical couple, by exact
/// symbolic reduction of the product drawn from stream `seed`. Throws
/// InvalidArgument when (V, E) is not walk-critical.
double accumulate_log_growth_exact(const DimerParams& params, double energy, std::size_t n_steps,
                                   std::uint64_t seed, Vec2 initial = {1.0, 0.0});

/// Realization r uses stream derive_seed(seed, r). Requires n_steps >= 1000, n_realizations >= 1.
LyapunovEstimate estimate_gamma(const DimerParams& params, double energy, std::size_t n_steps,
                                std::size_t n_realizations, std::uint64_t seed,
                                const GammaOptions& options = {});

/// One estimate per energy of a non-empty, strictly increasing grid. Every
/// energy reuses the same disorder streams (common random numbers), so each
/// entry equals estimate_gamma at that energy with the same seed.
std::vector<LyapunovEstimate> scan_gamma(const DimerParams& params, std::span<const double> energies,
                                         std::size_t n_steps, std::size_t n_realizations,
                                         std::uint64_t seed, const GammaOptions& options = {});

/// ln ||T_k...T_1|| (operator norm of the full product) sampled every
/// `stride` steps, k = stride, 2*stride, ... <= n_steps.
std::vector<double> log_norm_trace(const DimerParams& params, double energy, std::size_t n_steps,
                                   std::uint64_t seed, std::size_t stride);

enum class Verdict { ResonanceCritical, WalkCritical, PositiveExponent };

const char* to_string(Verdict v) noexcept;

struct CriticalityReport {
    Verdict verdict = Verdict::PositiveExponent;
    double alpha = 0.0;  ///< E - V
    double beta = 0.0;   ///< E + V
    SpectralClass class_alpha;
    SpectralClass class_beta;
    std::string matched_condition;
};

inline constexpr double kCriticalTolerance = 1e-9;

/// Exact criticality from the elliptic/parabolic/hyperbolic case analysis of
/// T_alpha = T^E_V and T_beta = T^E_{-V}.
CriticalityReport classify_criticality(const DimerParams& params, double energy);

/// Sample for a one-sided power-law fit gamma(E_c +- offset).
struct VanishingSample {
    double offset = 0.0;
    int side = +1;  ///< +1 for E_c + offset, -1 for E_c - offset
    double gamma = 0.0;
    double std_error = 0.0;
};

struct VanishingFit {
    double pooled_slope = 0.0;
    double pooled_slope_stderr = 0.0;
    double left_slope = 0.0;   ///< NaN when fewer than two usable points
    double right_slope = 0.0;  ///< NaN when fewer than two usable points
    std::size_t points_used = 0;
    std::vector<VanishingSample> samples;
};

/// Least-squares ln gamma vs ln offset, pooled over both sides and per side.
/// Samples with gamma < 3 std_error are excluded; throws InsufficientSignal if
/// fewer than four remain.
VanishingFit fit_vanishing_exponent(std::span<const VanishingSample> samples);

/// Estimates gamma at E_c +- offset and fits the vanishing exponent. E_c must
/// be a resonance-critical energy; offsets positive with max >= 4 * min.
VanishingFit fit_quadratic_vanishing(const DimerParams& params, double critical_energy,
                                     std::span<const double> offsets, std::size_t n_steps,
                                     std::size_t n_realizations, std::uint64_t seed,
                                     const GammaOptions& options = {});

} // namespace dimer
