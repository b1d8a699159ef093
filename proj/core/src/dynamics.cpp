#include "dimer/dynamics.hpp"

#include "dimer/error.hpp"
#include "dimer/fit.hpp"
#include "dimer/parallel.hpp"
#include "dimer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dimer {

SpectralData::SpectralData(std::vector<double> potential, TridiagonalEigen eigen)
    : potential_(std::move(potential)), eigen_(std::move(eigen))
{
    if (eigen_.n != potential_.size()) {
        throw InvalidArgument("SpectralData: eigen-decomposition size does not match the lattice");
    }
}

Amplitudes SpectralData::apply(std::span<const std::complex<double>> psi) const
{
    const std::size_t n = size();
    if (psi.size() != n) {
        throw LengthMismatch("SpectralData::apply: state has " + std::to_string(psi.size()) + " sites, lattice " +
                             std::to_string(n));
    }
    Amplitudes out(n);
    for (std::size_t x = 0; x < n; ++x) {
        std::complex<double> acc = potential_[x] * psi[x];
        if (x > 0) {
            acc += psi[x - 1];
        }
        if (x + 1 < n) {
            acc += psi[x + 1];
        }
        out[x] = acc;
    }
    return out;
}

double SpectralData::orthonormality_error() const
{
    const std::size_t n = size();
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const auto va = eigenvector(a);
        for (std::size_t b = a; b < n; ++b) {
            const auto vb = eigenvector(b);
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                dot += va[k] * vb[k];
            }
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double SpectralData::residual_error() const
{
    const std::size_t n = size();
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto v = eigenvector(k);
        const double e = eigen_.values[k];
        double sq = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            double hv = potential_[x] * v[x];
            if (x > 0) {
                hv += v[x - 1];
            }
            if (x + 1 < n) {
                hv += v[x + 1];
            }
            sq += (hv - e * v[x]) * (hv - e * v[x]);
        }
        worst = std::max(worst, std::sqrt(sq));
    }
    return worst;
}

SpectralData diagonalize_potential(std::vector<double> potential)
{
    const std::vector<double> ones(potential.empty() ? 0 : potential.size() - 1, 1.0);
    TridiagonalEigen eig = eigen_tridiagonal(potential, ones);
    return SpectralData(std::move(potential), std::move(eig));
}

SpectralData diagonalize(const DisorderRealization& w, std::size_t n_sites)
{
    if (n_sites < 2 || n_sites % 2 != 0) {
        throw InvalidArgument("diagonalize: N must be even and >= 2");
    }
    if (w.n_dimers() < n_sites / 2) {
        throw LengthMismatch("diagonalize: realization has " + std::to_string(w.n_dimers()) + " dimers, need " +
                             std::to_string(n_sites / 2));
    }
    return diagonalize_potential(w.site_potential(n_sites));
}

InitialState InitialState::delta(std::size_t n_sites, std::size_t center)
{
    if (center >= n_sites) {
        throw InvalidArgument("InitialState::delta: center outside the lattice");
    }
    InitialState s;
    s.kind = Kind::Delta;
    s.amplitudes.assign(n_sites, 0.0);
    s.amplitudes[center] = 1.0;
    return s;
}

InitialState InitialState::exponential(std::size_t n_sites, std::size_t center, double theta)
{
    if (center >= n_sites) {
        throw InvalidArgument("InitialState::exponential: center outside the lattice");
    }
    if (!(theta > 0.0)) {
        throw InvalidArgument("InitialState::exponential: theta must be > 0");
    }
    InitialState s;
    s.kind = Kind::ExponentialDecay;
    s.theta = theta;
    s.amplitudes.resize(n_sites);
    double sq = 0.0;
    for (std::size_t x = 0; x < n_sites; ++x) {
        const double dist = std::abs(static_cast<double>(x) - static_cast<double>(center));
        const double a = std::exp(-theta * dist);
        s.amplitudes[x] = a;
        sq += a * a;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& a : s.amplitudes) {
        a *= inv;
    }
    return s;
}

Amplitudes spectral_coefficients(const SpectralData& sd, std::span<const std::complex<double>> psi)
{
    const std::size_t n = sd.size();
    if (psi.size() != n) {
        throw LengthMismatch("spectral_coefficients: state has " + std::to_string(psi.size()) +
                             " sites, lattice " + std::to_string(n));
    }
    Amplitudes c(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto v = sd.eigenvector(k);
        double re = 0.0;
        double im = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            re += v[x] * psi[x].real();
            im += v[x] * psi[x].imag();
        }
        c[k] = {re, im};
    }
    return c;
}

namespace {

// sum over selected k of weight_k * phi_k.
Amplitudes synthesize(const SpectralData& sd, std::span<const std::complex<double>> weights)
{
    const std::size_t n = sd.size();
    std::vector<double> re(n, 0.0);
    std::vector<double> im(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double wr = weights[k].real();
        const double wi = weights[k].imag();
        if (wr == 0.0 && wi == 0.0) {
            continue;
        }
        const auto v = sd.eigenvector(k);
        for (std::size_t x = 0; x < n; ++x) {
            re[x] += wr * v[x];
            im[x] += wi * v[x];
        }
    }
    Amplitudes out(n);
    for (std::size_t x = 0; x < n; ++x) {
        out[x] = {re[x], im[x]};
    }
    return out;
}

Amplitudes evolved_weights(const SpectralData& sd, const Amplitudes& coeffs, double t)
{
    const auto e = sd.eigenvalues();
    Amplitudes w(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        w[k] = coeffs[k] * std::polar(1.0, -e[k] * t);
    }
    return w;
}

void mask_outside(const SpectralData& sd, Amplitudes& coeffs, const Interval& interval)
{
    const auto e = sd.eigenvalues();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (!interval.contains(e[k])) {
            coeffs[k] = 0.0;
        }
    }
}

void require_interval(const Interval& interval, const char* where)
{
    if (!(interval.lo <= interval.hi)) {
        throw InvalidArgument(std::string(where) + ": interval must satisfy lo <= hi");
    }
}

double position_moment(const SpectralData& sd, std::span<const std::complex<double>> psi, double q)
{
    const double x0 = static_cast<double>(sd.origin());
    double acc = 0.0;
    for (std::size_t x = 0; x < psi.size(); ++x) {
        const double dist = std::abs(static_cast<double>(x) - x0);
        if (dist > 0.0) {
            acc += std::pow(dist, q) * std::norm(psi[x]);
        }
    }
    return acc;
}

} // namespace

Amplitudes evolve(const SpectralData& sd, std::span<const std::complex<double>> psi0, double t)
{
    if (!(t >= 0.0)) {
        throw InvalidArgument("evolve: t must be >= 0");
    }
    if (t == 0.0) {
        return Amplitudes(psi0.begin(), psi0.end());
    }
    return synthesize(sd, evolved_weights(sd, spectral_coefficients(sd, psi0), t));
}

Amplitudes project(const SpectralData& sd, std::span<const std::complex<double>> psi, const Interval& interval)
{
    require_interval(interval, "project");
    Amplitudes c = spectral_coefficients(sd, psi);
    mask_outside(sd, c, interval);
    return synthesize(sd, c);
}

double moment(const SpectralData& sd, std::span<const std::complex<double>> psi0, const Interval& interval,
              double q, double t)
{
    if (!(q > 0.0)) {
        throw InvalidArgument("moment: q must be > 0");
    }
    if (!(t >= 0.0)) {
        throw InvalidArgument("moment: t must be >= 0");
    }
    require_interval(interval, "moment");
    Amplitudes c = spectral_coefficients(sd, psi0);
    mask_outside(sd, c, interval);
    return position_moment(sd, synthesize(sd, evolved_weights(sd, c, t)), q);
}

MomentSeries moment_series(const SpectralData& sd, std::span<const std::complex<double>> psi0,
                           const Interval& interval, double q, std::span<const double> times)
{
    if (!(q > 0.0)) {
        throw InvalidArgument("moment_series: q must be > 0");
    }
    require_interval(interval, "moment_series");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw InvalidArgument("moment_series: times must be non-negative and ascending");
        }
    }
    Amplitudes c = spectral_coefficients(sd, psi0);
    mask_outside(sd, c, interval);

    MomentSeries out;
    out.q = q;
    out.interval = interval;
    out.times.assign(times.begin(), times.end());
    out.values.reserve(times.size());
    for (double t : times) {
        out.values.push_back(position_moment(sd, synthesize(sd, evolved_weights(sd, c, t)), q));
    }
    out.sup_value = out.values.empty() ? 0.0 : *std::max_element(out.values.begin(), out.values.end());
    return out;
}

MomentSeries ensemble_moment_series(const DimerParams& params, std::size_t n_sites, std::uint64_t seed,
                                    std::size_t n_realizations, std::span<const std::complex<double>> psi0,
                                    const Interval& interval, double q, std::span<const double> times,
                                    unsigned threads)
{
    if (n_realizations == 0) {
        throw InvalidArgument("ensemble_moment_series: need at least one realization");
    }
    const std::size_t n_dimers = (n_sites + 1) / 2;
    std::vector<MomentSeries> members(n_realizations);
    parallel_for(
        n_realizations,
        [&](std::size_t r) {
            const SpectralData sd = diagonalize(sample_disorder(params, n_dimers, derive_seed(seed, r)), n_sites);
            members[r] = moment_series(sd, psi0, interval, q, times);
        },
        threads);

    MomentSeries out;
    out.q = q;
    out.interval = interval;
    out.times.assign(times.begin(), times.end());
    out.values.assign(times.size(), 0.0);
    for (const MomentSeries& m : members) {
        for (std::size_t i = 0; i < times.size(); ++i) {
            out.values[i] += m.values[i];
        }
    }
    for (double& v : out.values) {
        v /= static_cast<double>(n_realizations);
    }
    out.sup_value = out.values.empty() ? 0.0 : *std::max_element(out.values.begin(), out.values.end());
    return out;
}

double plateau_ratio(const MomentSeries& series, const Interval& window)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        if (window.contains(series.times[i])) {
            v.push_back(series.values[i]);
        }
    }
    if (v.empty()) {
        throw InvalidArgument("plateau_ratio: no samples in the window");
    }
    const double med = median(v);
    const double hi = *std::max_element(v.begin(), v.end());
    return med > 0.0 ? hi / med : (hi > 0.0 ? INFINITY : 1.0);
}

GrowthFit fit_growth_exponent(const MomentSeries& series, const Interval& window)
{
    std::vector<double> t;
    std::vector<double> r;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        if (window.contains(series.times[i])) {
            t.push_back(series.times[i]);
            r.push_back(series.values[i]);
        }
    }
    if (t.size() < 8) {
        throw InvalidArgument("fit_growth_exponent: window holds " + std::to_string(t.size()) +
                              " points, need at least 8");
    }
    const LinearFit fit = log_log_fit(t, r);
    // Two-sided 95% normal quantile; the window has at least 8 points.
    constexpr double z95 = 1.959963984540054;
    GrowthFit out;
    out.slope = fit.slope;
    out.slope_stderr = fit.slope_stderr;
    out.ci95_lo = fit.slope - z95 * fit.slope_stderr;
    out.ci95_hi = fit.slope + z95 * fit.slope_stderr;
    out.r2 = fit.r2;
    out.n_points = fit.n;
    return out;
}

LocalizationProfile localization_profile(std::span<const double> phi, double floor)
{
    if (!(floor > 0.0 && floor < 1.0)) {
        throw InvalidArgument("localization_profile: floor must lie in (0,1)");
    }
    if (phi.empty()) {
        throw InvalidArgument("localization_profile: empty vector");
    }
    LocalizationProfile out;
    std::size_t center = 0;
    for (std::size_t x = 1; x < phi.size(); ++x) {
        if (std::abs(phi[x]) > std::abs(phi[center])) {
            center = x;
        }
    }
    out.center = center;
    out.support = static_cast<std::size_t>(
        std::count_if(phi.begin(), phi.end(), [&](double v) { return std::abs(v) > floor; }));
    out.degenerate = out.support < 6;

    double rate_sum = 0.0;
    double r2_sum = 0.0;
    double weight = 0.0;
    const auto fit_side = [&](int dir) {
        std::vector<double> dist;
        std::vector<double> logs;
        for (std::size_t k = 0;; ++k) {
            const long long x = static_cast<long long>(center) + dir * static_cast<long long>(k);
            if (x < 0 || x >= static_cast<long long>(phi.size())) {
                break;
            }
            const double a = std::abs(phi[static_cast<std::size_t>(x)]);
            if (a > floor) {
                dist.push_back(static_cast<double>(k));
                logs.push_back(std::log(a));
            }
        }
        if (dist.size() < 2) {
            return;
        }
        const LinearFit fit = linear_fit(dist, logs);
        const double w = static_cast<double>(dist.size());
        rate_sum += w * -fit.slope;
        r2_sum += w * fit.r2;
        weight += w;
    };
    fit_side(-1);
    fit_side(+1);
    if (weight > 0.0) {
        out.decay_rate = rate_sum / weight;
        out.fit_r2 = r2_sum / weight;
    } else {
        out.decay_rate = std::nan("");
        out.fit_r2 = 0.0;
        out.degenerate = true;
    }
    return out;
}

std::vector<LocalizationProfile> localization_profiles(const SpectralData& sd, double floor)
{
    std::vector<LocalizationProfile> out;
    out.reserve(sd.size());
    const auto e = sd.eigenvalues();
    for (std::size_t k = 0; k < sd.size(); ++k) {
        LocalizationProfile p = localization_profile(sd.eigenvector(k), floor);
        p.index = k;
        p.energy = e[k];
        out.push_back(p);
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
    if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
        throw InvalidArgument("log_spaced: need count >= 2 and 0 < lo < hi");
    }
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

double norm(std::span<const std::complex<double>> psi)
{
    double sq = 0.0;
    for (const auto& a : psi) {
        sq += std::norm(a);
    }
    return std::sqrt(sq);
}

} // namespace dimer
