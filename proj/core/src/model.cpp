#include "dimer/model.hpp"

#include <algorithm>
#include <cmath>

namespace dimer {

void DimerParams::validate() const
{
    if (!(V > 0.0) || !std::isfinite(V)) {
        throw InvalidArgument("V must be > 0");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("p must lie in (0,1)");
    }
}

DisorderRealization::DisorderRealization(DimerParams params, std::uint64_t seed,
                                         std::vector<double> dimer_values)
    : params_(params), seed_(seed), values_(std::move(dimer_values))
{
    params_.validate();
    for (double v : values_) {
        if (v != params_.V && v != -params_.V) {
            throw InvalidArgument("DisorderRealization: dimer value " + std::to_string(v) +
                                  " is not +-V");
        }
    }
}

std::vector<double> DisorderRealization::site_potential(std::size_t n_sites) const
{
    if (n_sites > this->n_sites()) {
        throw LengthMismatch("site_potential: requested " + std::to_string(n_sites) +
                             " sites from a realization of " + std::to_string(this->n_sites()));
    }
    std::vector<double> out(n_sites);
    for (std::size_t x = 0; x < n_sites; ++x) {
        out[x] = values_[x / 2];
    }
    return out;
}

DisorderRealization sample_disorder(const DimerParams& params, std::size_t n_dimers, std::uint64_t seed)
{
    params.validate();
    if (n_dimers < 1) {
        throw InvalidArgument("sample_disorder: n_dimers must be >= 1");
    }
    DimerStream stream(params, seed);
    std::vector<double> values(n_dimers);
    for (auto& v : values) {
        v = stream.next();
    }
    return DisorderRealization(params, seed, std::move(values));
}

bool SpectrumSet::contains(double e, double tol) const noexcept
{
    return std::any_of(intervals.begin(), intervals.end(),
                       [&](const Interval& i) { return i.lo - tol <= e && e <= i.hi + tol; });
}

SpectrumSet almost_sure_spectrum(const DimerParams& params)
{
    params.validate();
    const double v = params.V;
    if (v <= 2.0) {
        return {{{-v - 2.0, v + 2.0}}};
    }
    return {{{-v - 2.0, -v + 2.0}, {v - 2.0, v + 2.0}}};
}

} // namespace dimer
