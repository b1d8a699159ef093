#include "dimer/lyapunov.hpp"

#include "dimer/criticalwalk.hpp"
#include "dimer/error.hpp"
#include "dimer/fit.hpp"
#include "dimer/parallel.hpp"
#include "dimer/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numbers>
#include <utility>
#include <cmath>
#include <limits>

namespace dimer {

namespace {

// Per-step renormalization by the power of two nearest the larger component:
// scaling by 2^-k is exact, so the log sum is k * ln 2 accumulated in an
// integer plus the log-norm of the final vector.
inline int binary_exponent(double v) noexcept
{
    return static_cast<int>((std::bit_cast<std::uint64_t>(v) >> 52) & 0x7ff) - 1023;
}

inline double power_of_two(int k) noexcept
{
    return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

template <typename NextIsMinus>
double growth_loop(double energy, double v, std::size_t n_steps, NextIsMinus&& next_is_minus, Vec2 w)
{
    // Indexed by "dimer takes -V", so the hot loop selects without branching.
    const Mat2 mats[2] = {two_step_transfer(energy, v), two_step_transfer(energy, -v)};
    const double w_norm = w.norm();
    if (!(w_norm > 0.0)) {
        throw InvalidArgument("accumulate_log_growth: initial vector must be nonzero");
    }
    double x = w.x / w_norm;
    double y = w.y / w_norm;
    long long exponent = 0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const Mat2& t = mats[next_is_minus() ? 1 : 0];
        const double nx = t.a * x + t.b * y;
        const double ny = t.c * x + t.d * y;
        const int k = binary_exponent(std::max(std::abs(nx), std::abs(ny)));
        if (k < -1000 || k > 1000) {
            throw NumericOverflow("accumulate_log_growth: step norm left the representable range");
        }
        const double scale = power_of_two(-k);
        x = nx * scale;
        y = ny * scale;
        exponent += k;
    }
    return static_cast<double>(exponent) * std::numbers::ln2 + std::log(std::hypot(x, y));
}

// kChains independent realizations advanced in lockstep. Each chain performs
// exactly the operations of growth_loop, so results are bit-identical; the
// interleaving only hides the latency of the per-step dependency chain.
constexpr std::size_t kChains = 4;

std::array<double, kChains> growth_loop_interleaved(double energy, double v, double p, std::size_t n_steps,
                                                    const std::array<std::uint64_t, kChains>& seeds, Vec2 w)
{
    const Mat2 mats[2] = {two_step_transfer(energy, v), two_step_transfer(energy, -v)};
    const double w_norm = w.norm();
    if (!(w_norm > 0.0)) {
        throw InvalidArgument("accumulate_log_growth: initial vector must be nonzero");
    }
    auto rng = [&]<std::size_t... I>(std::index_sequence<I...>) {
        return std::array<RandomStream, kChains>{RandomStream(seeds[I])...};
    }(std::make_index_sequence<kChains>{});
    std::array<double, kChains> x;
    std::array<double, kChains> y;
    std::array<long long, kChains> exponent{};
    x.fill(w.x / w_norm);
    y.fill(w.y / w_norm);
    for (std::size_t i = 0; i < n_steps; ++i) {
        bool out_of_range = false;
        for (std::size_t c = 0; c < kChains; ++c) {
            const Mat2& t = mats[rng[c].bernoulli(p) ? 1 : 0];
            const double nx = t.a * x[c] + t.b * y[c];
            const double ny = t.c * x[c] + t.d * y[c];
            const int k = binary_exponent(std::max(std::abs(nx), std::abs(ny)));
            out_of_range |= k < -1000 || k > 1000;
            const double scale = power_of_two(-k);
            x[c] = nx * scale;
            y[c] = ny * scale;
            exponent[c] += k;
        }
        if (out_of_range) {
            throw NumericOverflow("accumulate_log_growth: step norm left the representable range");
        }
    }
    std::array<double, kChains> out;
    for (std::size_t c = 0; c < kChains; ++c) {
        out[c] = static_cast<double>(exponent[c]) * std::numbers::ln2 + std::log(std::hypot(x[c], y[c]));
    }
    return out;
}

} // namespace

double accumulate_log_growth(std::span<const double> dimer_values, double energy, Vec2 initial)
{
    const double w_norm = initial.norm();
    if (!(w_norm > 0.0)) {
        throw InvalidArgument("accumulate_log_growth: initial vector must be nonzero");
    }
    Vec2 w{initial.x / w_norm, initial.y / w_norm};
    double log_sum = 0.0;
    for (double v : dimer_values) {
        const Vec2 n = two_step_transfer(energy, v) * w;
        const double len = n.norm();
        log_sum += std::log(len);
        w = {n.x / len, n.y / len};
    }
    return log_sum;
}

double accumulate_log_growth(const DimerParams& params, double energy, std::size_t n_steps,
                             std::uint64_t seed, Vec2 initial)
{
    params.validate();
    DimerStream stream(params, seed);
    return growth_loop(energy, params.V, n_steps, [&] { return stream.next_is_minus(); }, initial);
}

namespace {

// ln || left * diag(l^V, l^-V) * w ||, with l^|V| factored out so that no
// intermediate overflows for any |V|.
double log_norm_of_power(const Mat2& left, Vec2 w, double log_lambda, long long power)
{
    const double k = static_cast<double>(std::llabs(power));
    const double v = static_cast<double>(power);
    const Vec2 scaled{std::exp((v - k) * log_lambda) * w.x, std::exp((-v - k) * log_lambda) * w.y};
    return k * log_lambda + std::log((left * scaled).norm());
}

// Eigenbasis (columns) of a hyperbolic unimodular matrix, larger eigenvalue first.
Mat2 hyperbolic_eigenbasis(const Mat2& m, double l1)
{
    const double l2 = 1.0 / l1;
    // (b, l - a) solves the first row; fall back to the second row when b = 0.
    if (std::abs(m.b) > 0.0) {
        return Mat2{m.b, m.b, l1 - m.a, l2 - m.a};
    }
    return Mat2{l1 - m.d, l2 - m.d, m.c, m.c};
}

} // namespace

double accumulate_log_growth_exact(const DimerParams& params, double energy, std::size_t n_steps,
                                   std::uint64_t seed, Vec2 initial)
{
    const CriticalityReport report = classify_criticality(params, energy);
    if (report.verdict != Verdict::WalkCritical) {
        throw InvalidArgument("accumulate_log_growth_exact: (V, E) is not a walk-critical couple");
    }
    const double w_norm = initial.norm();
    if (!(w_norm > 0.0)) {
        throw InvalidArgument("accumulate_log_growth_exact: initial vector must be nonzero");
    }
    const bool sqrt2 = report.matched_condition == "alpha^2=2, beta^2=2";
    const CriticalCoupleAlgebra alg =
        build_algebra(sqrt2 ? CriticalCouple::Sqrt2 : CriticalCouple::HalfSqrt2, energy > 0.0 ? +1 : -1);
    // A dimer at -V gives T^E_{-V}, which is the "beta" role unless the roles are swapped.
    const Letter minus_letter = alg.roles_swapped ? Letter::Alpha : Letter::Beta;
    const Letter plus_letter = alg.roles_swapped ? Letter::Beta : Letter::Alpha;
    const Vec2 w0{initial.x / w_norm, initial.y / w_norm};
    DimerStream stream(params, seed);

    if (!sqrt2) {
        // Left multiplication on sign * T_beta^u T_alpha^V:
        // T_alpha: V += (u ? -1 : 1); T_beta: u flips (sign flips when u was 1).
        int u = 0;
        long long power = 0;
        for (std::size_t i = 0; i < n_steps; ++i) {
            const Letter l = stream.next_is_minus() ? minus_letter : plus_letter;
            if (l == Letter::Alpha) {
                power += u == 0 ? 1 : -1;
            } else {
                u ^= 1;
            }
        }
        const Mat2 left = u == 1 ? alg.basis * alg.T_beta_reduced : alg.basis;
        return log_norm_of_power(left, alg.basis.inverse() * w0, std::log(alg.lambda1), power);
    }

    // Pairs T_{2k+2} T_{2k+1}: equal letters give -Id, (alpha, beta) gives
    // T_alpha T_beta and (beta, alpha) its inverse.
    long long power = 0;
    std::size_t i = 0;
    for (; i + 2 <= n_steps; i += 2) {
        const Letter first = stream.next_is_minus() ? minus_letter : plus_letter;
        const Letter second = stream.next_is_minus() ? minus_letter : plus_letter;
        if (first != second) {
            power += second == Letter::Alpha ? 1 : -1;
        }
    }
    Mat2 trailing = Mat2::identity();
    if (i < n_steps) {
        trailing = alg.original(stream.next_is_minus() ? minus_letter : plus_letter);
    }
    const Mat2 pair = alg.T_alpha * alg.T_beta;
    const Mat2 basis = hyperbolic_eigenbasis(pair, alg.lambda1);
    return log_norm_of_power(trailing * basis, basis.inverse() * w0, std::log(alg.lambda1), power);
}

LyapunovEstimate estimate_gamma(const DimerParams& params, double energy, std::size_t n_steps,
                                std::size_t n_realizations, std::uint64_t seed,
                                const GammaOptions& options)
{
    params.validate();
    if (n_steps < 1000) {
        throw InvalidArgument("estimate_gamma: n_steps must be >= 1000");
    }
    if (n_realizations < 1) {
        throw InvalidArgument("estimate_gamma: n_realizations must be >= 1");
    }
    bool exact = false;
    switch (options.evaluation) {
    case ProductEvaluation::Auto:
        exact = classify_criticality(params, energy).verdict == Verdict::WalkCritical;
        break;
    case ProductEvaluation::Floating: exact = false; break;
    case ProductEvaluation::ExactCritical: exact = true; break;
    }
    std::vector<double> per_realization(n_realizations);
    const double steps = static_cast<double>(n_steps);
    if (exact) {
        parallel_for(
            n_realizations,
            [&](std::size_t r) {
                per_realization[r] =
                    accumulate_log_growth_exact(params, energy, n_steps, derive_seed(seed, r), options.initial) / steps;
            },
            options.threads);
    } else {
        params.validate();
        const std::size_t n_groups = n_realizations / kChains;
        parallel_for(
            n_groups + n_realizations % kChains,
            [&](std::size_t g) {
                if (g < n_groups) {
                    std::array<std::uint64_t, kChains> seeds;
                    for (std::size_t c = 0; c < kChains; ++c) {
                        seeds[c] = derive_seed(seed, g * kChains + c);
                    }
                    const auto logs =
                        growth_loop_interleaved(energy, params.V, params.p, n_steps, seeds, options.initial);
                    for (std::size_t c = 0; c < kChains; ++c) {
                        per_realization[g * kChains + c] = logs[c] / steps;
                    }
                } else {
                    const std::size_t r = n_groups * kChains + (g - n_groups);
                    per_realization[r] =
                        accumulate_log_growth(params, energy, n_steps, derive_seed(seed, r), options.initial) / steps;
                }
            },
            options.threads);
    }

    LyapunovEstimate est;
    est.energy = energy;
    est.n_steps = n_steps;
    est.n_realizations = n_realizations;
    est.gamma_per_dimer = mean(per_realization);
    est.gamma_per_site = est.gamma_per_dimer / 2.0;
    est.std_error = std::sqrt(sample_variance(per_realization) / static_cast<double>(n_realizations));
    return est;
}

std::vector<LyapunovEstimate> scan_gamma(const DimerParams& params, std::span<const double> energies,
                                         std::size_t n_steps, std::size_t n_realizations,
                                         std::uint64_t seed, const GammaOptions& options)
{
    if (energies.empty()) {
        throw InvalidArgument("scan_gamma: energy grid is empty");
    }
    for (std::size_t i = 1; i < energies.size(); ++i) {
        if (!(energies[i] > energies[i - 1])) {
            throw InvalidArgument("scan_gamma: energy grid must be strictly increasing");
        }
    }
    std::vector<LyapunovEstimate> out(energies.size());
    GammaOptions inner = options;
    inner.threads = 1;
    parallel_for(
        energies.size(),
        [&](std::size_t i) {
            out[i] = estimate_gamma(params, energies[i], n_steps, n_realizations, seed, inner);
        },
        options.threads);
    return out;
}

std::vector<double> log_norm_trace(const DimerParams& params, double energy, std::size_t n_steps,
                                   std::uint64_t seed, std::size_t stride)
{
    params.validate();
    if (stride < 1) {
        throw InvalidArgument("log_norm_trace: stride must be >= 1");
    }
    const Mat2 tm = two_step_transfer(energy, -params.V);
    const Mat2 tp = two_step_transfer(energy, params.V);
    DimerStream stream(params, seed);
    Mat2 product = Mat2::identity();
    double log_scale = 0.0;
    std::vector<double> out;
    out.reserve(n_steps / stride);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        product = (stream.next_is_minus() ? tm : tp) * product;
        const double s = product.max_abs();
        product = (1.0 / s) * product;
        log_scale += std::log(s);
        if (k % stride == 0) {
            out.push_back(log_scale + std::log(product.norm()));
        }
    }
    return out;
}

const char* to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::ResonanceCritical: return "ResonanceCritical";
    case Verdict::WalkCritical: return "WalkCritical";
    case Verdict::PositiveExponent: return "PositiveExponent";
    }
    return "?";
}

CriticalityReport classify_criticality(const DimerParams& params, double energy)
{
    params.validate();
    const double v = params.V;
    CriticalityReport report;
    report.alpha = energy - v;
    report.beta = energy + v;
    report.class_alpha = classify(two_step_transfer(energy, v));
    report.class_beta = classify(two_step_transfer(energy, -v));

    const double a = report.alpha;
    const double b = report.beta;
    const auto near = [](double x, double y) { return std::abs(x - y) <= kCriticalTolerance; };

    if (near(std::abs(energy), v)) {
        // At E = +-V one matrix is -Id and the other has spectral radius 1 iff V <= 1.
        const bool plus = energy > 0.0;
        if (v <= 1.0 + kCriticalTolerance) {
            report.verdict = Verdict::ResonanceCritical;
            report.matched_condition = plus ? "E=+V, V<=1" : "E=-V, V<=1";
        } else {
            report.verdict = Verdict::PositiveExponent;
            report.matched_condition = plus ? "E=+V, V>1" : "E=-V, V>1";
        }
        return report;
    }
    if (near(b * b, 2.0) && near(a, 2.0 * b)) {
        report.verdict = Verdict::WalkCritical;
        report.matched_condition = "beta^2=2, alpha=2*beta";
    } else if (near(a * a, 2.0) && near(b, 2.0 * a)) {
        report.verdict = Verdict::WalkCritical;
        report.matched_condition = "alpha^2=2, beta=2*alpha";
    } else if (near(a * a, 2.0) && near(b * b, 2.0)) {
        report.verdict = Verdict::WalkCritical;
        report.matched_condition = "alpha^2=2, beta^2=2";
    } else {
        report.verdict = Verdict::PositiveExponent;
        report.matched_condition = "none";
    }
    return report;
}

VanishingFit fit_vanishing_exponent(std::span<const VanishingSample> samples)
{
    VanishingFit out;
    out.samples.assign(samples.begin(), samples.end());
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> x_side[2];
    std::vector<double> y_side[2];
    for (const auto& s : samples) {
        if (!(s.offset > 0.0)) {
            throw InvalidArgument("fit_vanishing_exponent: offsets must be positive");
        }
        if (!(s.gamma >= 3.0 * s.std_error) || !(s.gamma > 0.0)) {
            continue;
        }
        const double lx = std::log(s.offset);
        const double ly = std::log(s.gamma);
        x.push_back(lx);
        y.push_back(ly);
        const int k = s.side > 0 ? 1 : 0;
        x_side[k].push_back(lx);
        y_side[k].push_back(ly);
    }
    out.points_used = x.size();
    if (x.size() < 4) {
        throw InsufficientSignal("fit_vanishing_exponent: only " + std::to_string(x.size()) +
                                 " estimates exceed 3 standard errors (need 4)");
    }
    const LinearFit pooled = linear_fit(x, y);
    out.pooled_slope = pooled.slope;
    out.pooled_slope_stderr = pooled.slope_stderr;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const auto side_slope = [&](int k) {
        if (x_side[k].size() < 2) {
            return nan;
        }
        return linear_fit(x_side[k], y_side[k]).slope;
    };
    out.left_slope = side_slope(0);
    out.right_slope = side_slope(1);
    return out;
}

VanishingFit fit_quadratic_vanishing(const DimerParams& params, double critical_energy,
                                     std::span<const double> offsets, std::size_t n_steps,
                                     std::size_t n_realizations, std::uint64_t seed,
                                     const GammaOptions& options)
{
    if (classify_criticality(params, critical_energy).verdict != Verdict::ResonanceCritical) {
        throw InvalidArgument("fit_quadratic_vanishing: E_c is not a resonance-critical energy");
    }
    if (offsets.size() < 2) {
        throw InvalidArgument("fit_quadratic_vanishing: need at least two offsets");
    }
    for (double d : offsets) {
        if (!(d > 0.0)) {
            throw InvalidArgument("fit_quadratic_vanishing: offsets must be positive");
        }
    }
    const auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.end());
    if (*hi < 4.0 * *lo) {
        throw InvalidArgument("fit_quadratic_vanishing: offsets must span at least a factor of 4");
    }
    std::vector<VanishingSample> samples(2 * offsets.size());
    GammaOptions inner = options;
    inner.threads = 1;
    parallel_for(
        samples.size(),
        [&](std::size_t i) {
            const double d = offsets[i / 2];
            const int side = i % 2 == 0 ? -1 : +1;
            const auto est = estimate_gamma(params, critical_energy + side * d, n_steps,
                                            n_realizations, seed, inner);
            samples[i] = {d, side, est.gamma_per_dimer, est.std_error};
        },
        options.threads);
    return fit_vanishing_exponent(samples);
}

} // namespace dimer
