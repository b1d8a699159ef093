#pragma once

#include <cstddef>
#include <span>

namespace dimer {

/// Ordinary least-squares line y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Throws InvalidArgument for fewer than two points or constant x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Fit of ln y against ln x. Throws NonPositiveValues if any x or y <= 0.
LinearFit log_log_fit(std::span<const double> x, std::span<const double> y);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
/// Unbiased sample variance (n - 1 denominator); 0 for a single value.
double sample_variance(std::span<const double> x);
double median(std::span<const double> x);

} // namespace dimer
