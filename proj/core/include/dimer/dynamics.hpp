#pragma once

#include "dimer/model.hpp"
#include "dimer/tridiagonal.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dimer {

using Amplitudes = std::vector<std::complex<double>>;

/// Eigen-decomposition of the Dirichlet box Hamiltonian on sites [0, N).
/// Moments |X|^q are measured from origin() = N / 2.
class SpectralData {
public:
    SpectralData(std::vector<double> potential, TridiagonalEigen eigen);

    std::size_t size() const noexcept { return potential_.size(); }
    std::size_t origin() const noexcept { return potential_.size() / 2; }
    std::span<const double> potential() const noexcept { return potential_; }
    std::span<const double> eigenvalues() const noexcept { return eigen_.values; }
    std::span<const double> eigenvector(std::size_t n) const { return eigen_.vector(n); }

    /// H psi with the stored potential and Dirichlet ends.
    Amplitudes apply(std::span<const std::complex<double>> psi) const;

    /// max |<phi_m, phi_n> - delta_mn|.
    double orthonormality_error() const;
    /// max_n ||H phi_n - E_n phi_n||.
    double residual_error() const;

private:
    std::vector<double> potential_;
    TridiagonalEigen eigen_;
};

/// Diagonalizes the first N sites of w. N must be even and >= 2, and w must
/// cover N/2 dimers (LengthMismatch otherwise).
SpectralData diagonalize(const DisorderRealization& w, std::size_t n_sites);

/// Diagonalizes the box with an arbitrary on-site potential.
SpectralData diagonalize_potential(std::vector<double> potential);

struct InitialState {
    enum class Kind { Delta, ExponentialDecay };

    Kind kind = Kind::Delta;
    double theta = 0.0;  ///< decay mass for ExponentialDecay
    Amplitudes amplitudes;

    static InitialState delta(std::size_t n_sites, std::size_t center);
    /// Normalized e^{-theta |x - center|}; theta > 0.
    static InitialState exponential(std::size_t n_sites, std::size_t center, double theta);
};

/// c_n = <phi_n, psi>.
Amplitudes spectral_coefficients(const SpectralData& sd, std::span<const std::complex<double>> psi);

/// psi_t = sum_n exp(-i E_n t) <phi_n, psi0> phi_n; requires t >= 0.
Amplitudes evolve(const SpectralData& sd, std::span<const std::complex<double>> psi0, double t);

/// Spectral projector onto eigenvalues in the closed interval I (lo <= hi).
Amplitudes project(const SpectralData& sd, std::span<const std::complex<double>> psi, const Interval& interval);

/// sum_x |x - x0|^q |(P_I psi_t)(x)|^2; requires q > 0.
double moment(const SpectralData& sd, std::span<const std::complex<double>> psi0, const Interval& interval,
              double q, double t);

struct MomentSeries {
    double q = 2.0;
    Interval interval;
    std::vector<double> times;
    std::vector<double> values;
    double sup_value = 0.0;
};

/// Moments on an ascending time grid.
MomentSeries moment_series(const SpectralData& sd, std::span<const std::complex<double>> psi0,
                           const Interval& interval, double q, std::span<const double> times);

/// Disorder average of r(t): realization r is sample_disorder(params, N/2,
/// derive_seed(seed, r)), all started from psi0. sup_value is the sup of
/// the averaged series.
MomentSeries ensemble_moment_series(const DimerParams& params, std::size_t n_sites, std::uint64_t seed,
                                    std::size_t n_realizations, std::span<const std::complex<double>> psi0,
                                    const Interval& interval, double q, std::span<const double> times,
                                    unsigned threads = 0);

/// max / median of the series over times in [window.lo, window.hi].
double plateau_ratio(const MomentSeries& series, const Interval& window);

struct GrowthFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
};

/// Least-squares slope of ln r vs ln t over times in window. Requires at
/// least 8 points; throws NonPositiveValues if any r <= 0 there.
GrowthFit fit_growth_exponent(const MomentSeries& series, const Interval& window);

struct LocalizationProfile {
    std::size_t index = 0;
    double energy = 0.0;
    std::size_t center = 0;
    double decay_rate = 0.0;  ///< per site
    double fit_r2 = 0.0;
    std::size_t support = 0;  ///< sites with |phi| > floor
    bool degenerate = false;  ///< support below 6 sites; excluded from aggregates
};

inline constexpr double kDefaultAmplitudeFloor = 1e-12;

/// Center = leftmost argmax |phi|; decay_rate = -slope of ln|phi(x)| vs
/// |x - center| on each side (sites above floor), averaged with weights
/// equal to the number of points per side.
LocalizationProfile localization_profile(std::span<const double> phi, double floor = kDefaultAmplitudeFloor);

std::vector<LocalizationProfile> localization_profiles(const SpectralData& sd,
                                                       double floor = kDefaultAmplitudeFloor);

/// count points from lo to hi, geometrically spaced; count >= 2, 0 < lo < hi.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

double norm(std::span<const std::complex<double>> psi);

} // namespace dimer
