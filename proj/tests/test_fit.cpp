#include "dimer/error.hpp"
#include "dimer/fit.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace dimer;

TEST_CASE("linear fit recovers an exact line")
{
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) {
        y.push_back(1.5 - 0.25 * v);
    }
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.n == 5);
}

TEST_CASE("linear fit standard error")
{
    // Residuals -0.5, 1.5, -0.5, -0.5: SSR = 3, s^2 = 3/2, Sxx = 2.
    const std::vector<double> x{-1, 0, 0, 1};
    const std::vector<double> y{-3, 1, -1, 1};
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.slope_stderr == doctest::Approx(std::sqrt(0.75)));
}

TEST_CASE("linear fit input checks")
{
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0}, std::vector<double>{2.0}), InvalidArgument);
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 3.0}), InvalidArgument);
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{2.0}), InvalidArgument);
}

TEST_CASE("log-log fit of power laws")
{
    std::vector<double> t;
    std::vector<double> r;
    for (int i = 1; i <= 20; ++i) {
        t.push_back(i * 0.5);
        r.push_back(3.0 * std::pow(i * 0.5, 1.5));
    }
    CHECK(log_log_fit(t, r).slope == doctest::Approx(1.5).epsilon(1e-13));
    r[3] = 0.0;
    CHECK_THROWS_AS(log_log_fit(t, r), NonPositiveValues);
    r[3] = 1.0;
    t[0] = -1.0;
    CHECK_THROWS_AS(log_log_fit(t, r), NonPositiveValues);
}

TEST_CASE("summary statistics")
{
    const std::vector<double> v{4, 1, 3, 2};
    CHECK(mean(v) == 2.5);
    CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
    CHECK(median(v) == 2.5);
    CHECK(median(std::vector<double>{5, 1, 3}) == 3.0);
    CHECK(sample_variance(std::vector<double>{7.0}) == 0.0);

    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{2, 4, 6, 8, 10};
    const std::vector<double> c{5, 4, 3, 2, 1};
    CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
    CHECK(pearson_correlation(a, c) == doctest::Approx(-1.0));
}
