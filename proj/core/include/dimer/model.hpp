#pragma once

#include "dimer/error.hpp"
#include "dimer/rng.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dimer {

/// Bernoulli dimer ensemble: each dimer takes -V with probability p, +V otherwise.
struct DimerParams {
    double V = 0.5;
    double p = 0.5;

    /// Throws InvalidArgument unless V > 0 and 0 < p < 1.
    void validate() const;

    friend bool operator==(const DimerParams&, const DimerParams&) = default;
};

/// Closed real interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    double length() const noexcept { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sequential source of dimer values drawn from a seeded stream.
class DimerStream {
public:
    DimerStream(const DimerParams& params, std::uint64_t seed)
        : minus_(-params.V), plus_(params.V), p_(params.p), rng_(seed) {}

    double next() { return rng_.bernoulli(p_) ? minus_ : plus_; }
    /// True when the next dimer takes the value -V.
    bool next_is_minus() { return rng_.bernoulli(p_); }

private:
    double minus_;
    double plus_;
    double p_;
    RandomStream rng_;
};

/// One sample of the potential on dimers y = 0..n_dimers-1, sites 2y and 2y+1.
class DisorderRealization {
public:
    DisorderRealization(DimerParams params, std::uint64_t seed, std::vector<double> dimer_values);

    const DimerParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t n_dimers() const noexcept { return values_.size(); }
    std::size_t n_sites() const noexcept { return 2 * values_.size(); }
    std::span<const double> dimer_values() const noexcept { return values_; }

    double dimer_value(std::size_t y) const { return values_.at(y); }
    double site_value(std::size_t x) const { return values_.at(x / 2); }

    /// On-site potential of the first n_sites lattice sites.
    std::vector<double> site_potential(std::size_t n_sites) const;

    friend bool operator==(const DisorderRealization&, const DisorderRealization&) = default;

private:
    DimerParams params_;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

DisorderRealization sample_disorder(const DimerParams& params, std::size_t n_dimers, std::uint64_t seed);

/// (Hu)(x) = u(x-1) + u(x+1) + V(x) u(x) on sites [0, N) with u(-1) = u(N) = 0.
/// Throws LengthMismatch when w covers fewer than ceil(N/2) dimers.
template <typename T>
std::vector<T> apply_hamiltonian(std::span<const T> u, const DisorderRealization& w)
{
    const std::size_t n = u.size();
    if (w.n_dimers() < (n + 1) / 2) {
        throw LengthMismatch("apply_hamiltonian: realization has " + std::to_string(w.n_dimers()) +
                             " dimers, need " + std::to_string((n + 1) / 2));
    }
    std::vector<T> out(n);
    for (std::size_t x = 0; x < n; ++x) {
        T acc = w.site_value(x) * u[x];
        if (x > 0) {
            acc += u[x - 1];
        }
        if (x + 1 < n) {
            acc += u[x + 1];
        }
        out[x] = acc;
    }
    return out;
}

/// Disjoint, sorted, maximal closed intervals.
struct SpectrumSet {
    std::vector<Interval> intervals;

    bool contains(double e, double tol = 0.0) const noexcept;
};

/// {-V, +V} + [-2, 2], merged into one interval when V <= 2.
SpectrumSet almost_sure_spectrum(const DimerParams& params);

} // namespace dimer
