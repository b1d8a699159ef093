#include "dimer/error.hpp"
#include "dimer/lyapunov.hpp"
#include "dimer/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace dimer;

namespace {

const double kSqrt2 = std::numbers::sqrt2;
const double kHalfSqrt2 = std::numbers::sqrt2 / 2.0;

double direct_log_norm(std::span<const double> values, double energy, Vec2 w0)
{
    Mat2 p = Mat2::identity();
    for (double v : values) {
        p = two_step_transfer(energy, v) * p;
    }
    return std::log((p * w0).norm()) - std::log(w0.norm());
}

std::vector<double> hull_grid(double v, std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = -(v + 2.0) + 2.0 * (v + 2.0) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

} // namespace

TEST_CASE("telescoping identity for the renormalized accumulation")
{
    RandomStream rng(derive_seed(5, 5));
    for (int trial = 0; trial < 200; ++trial) {
        const double v = 0.1 + 2.5 * rng.uniform();
        const double e = 8.0 * rng.uniform() - 4.0;
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 40.0);
        const DisorderRealization w = sample_disorder({v, 0.5}, n, rng.next_u64());
        const Vec2 w0{rng.uniform() - 0.5, rng.uniform() - 0.5};
        const double direct = direct_log_norm(w.dimer_values(), e, w0);
        REQUIRE(std::abs(accumulate_log_growth(w.dimer_values(), e, w0) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
        REQUIRE(std::abs(accumulate_log_growth({v, 0.5}, e, n, w.seed(), w0) - direct) <=
                1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("streamed and stored disorder give the same accumulation")
{
    const DimerParams params{0.8, 0.35};
    const DisorderRealization w = sample_disorder(params, 100000, 17);
    const double stored = accumulate_log_growth(w.dimer_values(), 0.4);
    const double streamed = accumulate_log_growth(params, 0.4, 100000, 17);
    CHECK(std::abs(stored - streamed) <= 1e-9 * std::abs(stored));
}

TEST_CASE("estimate: zero exponent at the resonance E = V")
{
    const LyapunovEstimate e = estimate_gamma({0.5, 0.5}, 0.5, 1000000, 20, 42);
    CHECK(std::abs(e.gamma_per_dimer) <= 5e-3);
    CHECK(e.gamma_per_site == e.gamma_per_dimer / 2.0);
    CHECK(e.n_steps == 1000000);
    CHECK(e.n_realizations == 20);
    CHECK(e.std_error >= 0.0);
}

TEST_CASE("estimate: commuting-product closed form at E = V = 2")
{
    // T^V_V = -Id commutes with everything, so gamma = p ln rho(T^V_{-V}).
    const double rho = classify(two_step_transfer(2.0, -2.0)).spectral_radius;
    CHECK(rho == doctest::Approx(7.0 + 4.0 * std::sqrt(3.0)));
    const LyapunovEstimate e = estimate_gamma({2.0, 0.5}, 2.0, 1000000, 20, 42);
    CHECK(std::abs(e.gamma_per_dimer - 0.5 * std::log(rho)) <= 0.02);
}

TEST_CASE("estimate: regression floor at V = 0.5, E = 0")
{
    const LyapunovEstimate e = estimate_gamma({0.5, 0.5}, 0.0, 1000000, 20, 42);
    CHECK(e.gamma_per_dimer > 0.01);
}

TEST_CASE("estimate: input validation")
{
    CHECK_THROWS_AS(estimate_gamma({0.5, 0.5}, 0.0, 999, 4, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_gamma({0.5, 0.5}, 0.0, 1000, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_gamma({0.0, 0.5}, 0.0, 1000, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_gamma({0.5, 1.0}, 0.0, 1000, 1, 1), InvalidArgument);
    CHECK(estimate_gamma({0.5, 0.5}, 0.0, 1000, 1, 1).std_error == 0.0);
}

TEST_CASE("estimate: interleaved realizations match single realizations")
{
    const DimerParams params{0.9, 0.4};
    for (std::size_t r_count : {1u, 3u, 4u, 9u}) {
        const LyapunovEstimate e = estimate_gamma(params, 0.7, 20000, r_count, 99);
        double sum = 0.0;
        for (std::size_t r = 0; r < r_count; ++r) {
            sum += accumulate_log_growth(params, 0.7, 20000, derive_seed(99, r)) / 20000.0;
        }
        CHECK(e.gamma_per_dimer == doctest::Approx(sum / static_cast<double>(r_count)).epsilon(1e-14));
    }
}

TEST_CASE("estimate: result does not depend on the thread count")
{
    const DimerParams params{1.3, 0.6};
    GammaOptions one;
    one.threads = 1;
    GammaOptions four;
    four.threads = 4;
    const auto a = estimate_gamma(params, 0.2, 5000, 11, 3, one);
    const auto b = estimate_gamma(params, 0.2, 5000, 11, 3, four);
    CHECK(a.gamma_per_dimer == b.gamma_per_dimer);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("estimate: initial direction does not matter")
{
    GammaOptions other;
    other.initial = {0.0, 1.0};
    const auto a = estimate_gamma({0.5, 0.5}, 0.3, 100000, 8, 21);
    const auto b = estimate_gamma({0.5, 0.5}, 0.3, 100000, 8, 21, other);
    CHECK(std::abs(a.gamma_per_dimer - b.gamma_per_dimer) <= 1e-3);
}

TEST_CASE("property: p <-> 1-p with E <-> -E leaves gamma unchanged")
{
    for (double e : {0.3, 1.1, 2.2}) {
        const auto a = estimate_gamma({0.8, 0.3}, e, 200000, 8, 1);
        const auto b = estimate_gamma({0.8, 0.7}, -e, 200000, 8, 2);
        const double se = std::hypot(a.std_error, b.std_error);
        CHECK(std::abs(a.gamma_per_dimer - b.gamma_per_dimer) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("property: bounded products at E = +-V for V < 1")
{
    for (double v : {0.3, 0.5, 0.9}) {
        for (double e : {v, -v}) {
            const auto trace = log_norm_trace({v, 0.5}, e, 100000, 7, 100);
            REQUIRE(trace.size() == 1000);
            const double first_half = *std::max_element(trace.begin(), trace.begin() + 500);
            const double second_half = *std::max_element(trace.begin() + 500, trace.end());
            CHECK(second_half <= first_half + 1e-6);
            CHECK(first_half < 10.0);
        }
    }
    CHECK_THROWS_AS(log_norm_trace({0.5, 0.5}, 0.5, 100, 1, 0), InvalidArgument);
}

TEST_CASE("scan: resonance pair is critical")
{
    for (double v : {0.5, 1.0}) {
        const std::vector<double> grid{-v, v};
        for (const LyapunovEstimate& e : scan_gamma({v, 0.5}, grid, 200000, 8, 42)) {
            CHECK(std::abs(e.gamma_per_dimer) <= 5e-3);
        }
    }
}

TEST_CASE("scan: positive away from the resonances")
{
    const DimerParams params{0.5, 0.5};
    std::vector<double> grid;
    for (double e : hull_grid(0.5, 101)) {
        if (std::abs(std::abs(e) - 0.5) > 0.05) {
            grid.push_back(e);
        }
    }
    for (const LyapunovEstimate& e : scan_gamma(params, grid, 100000, 4, 42)) {
        CAPTURE(e.energy);
        CHECK(e.gamma_per_dimer > 0.0);
    }
}

TEST_CASE("scan: singleton grid equals estimate_gamma")
{
    const std::vector<double> grid{0.37};
    const auto rows = scan_gamma({0.5, 0.5}, grid, 10000, 5, 8);
    const auto direct = estimate_gamma({0.5, 0.5}, 0.37, 10000, 5, 8);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].gamma_per_dimer == direct.gamma_per_dimer);
    CHECK(rows[0].std_error == direct.std_error);
}

TEST_CASE("scan: order independence and grid checks")
{
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    const auto all = scan_gamma({0.5, 0.5}, grid, 5000, 3, 8);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(all[i].gamma_per_dimer == estimate_gamma({0.5, 0.5}, grid[i], 5000, 3, 8).gamma_per_dimer);
    }
    CHECK_THROWS_AS(scan_gamma({0.5, 0.5}, std::vector<double>{}, 5000, 3, 8), InvalidArgument);
    CHECK_THROWS_AS(scan_gamma({0.5, 0.5}, std::vector<double>{0.0, 0.0}, 5000, 3, 8), InvalidArgument);
    CHECK_THROWS_AS(scan_gamma({0.5, 0.5}, std::vector<double>{1.0, 0.0}, 5000, 3, 8), InvalidArgument);
}

TEST_CASE("classify_criticality examples")
{
    const auto res = classify_criticality({0.5, 0.5}, 0.5);
    CHECK(res.verdict == Verdict::ResonanceCritical);
    CHECK(res.matched_condition == "E=+V, V<=1");
    CHECK(classify_criticality({0.5, 0.5}, -0.5).matched_condition == "E=-V, V<=1");
    CHECK(classify_criticality({1.0, 0.5}, 1.0).verdict == Verdict::ResonanceCritical);

    const auto half = classify_criticality({kHalfSqrt2, 0.5}, -3.0 * kHalfSqrt2);
    CHECK(half.verdict == Verdict::WalkCritical);
    CHECK(half.matched_condition == "beta^2=2, alpha=2*beta");
    CHECK(half.alpha == doctest::Approx(-2.0 * kSqrt2));
    CHECK(half.beta == doctest::Approx(-kSqrt2));
    CHECK(half.class_alpha.kind == SpectralKind::Hyperbolic);
    CHECK(half.class_beta.kind == SpectralKind::Elliptic);

    const auto half_plus = classify_criticality({kHalfSqrt2, 0.5}, 3.0 * kHalfSqrt2);
    CHECK(half_plus.verdict == Verdict::WalkCritical);
    CHECK(half_plus.matched_condition == "alpha^2=2, beta=2*alpha");

    const auto s2 = classify_criticality({kSqrt2, 0.5}, 0.0);
    CHECK(s2.verdict == Verdict::WalkCritical);
    CHECK(s2.matched_condition == "alpha^2=2, beta^2=2");
}

TEST_CASE("classify_criticality negatives")
{
    const auto big = classify_criticality({2.0, 0.5}, 2.0);
    CHECK(big.verdict == Verdict::PositiveExponent);
    CHECK(big.matched_condition == "E=+V, V>1");
    CHECK(classify_criticality({0.5, 0.5}, 0.0).verdict == Verdict::PositiveExponent);
    CHECK(classify_criticality({0.5, 0.5}, 0.0).matched_condition == "none");
    CHECK(classify_criticality({0.5, 0.5}, 0.5 + 1e-6).verdict == Verdict::PositiveExponent);
    CHECK(classify_criticality({0.5, 0.5}, 0.5 + 1e-11).verdict == Verdict::ResonanceCritical);
    CHECK(classify_criticality({kSqrt2, 0.5}, 1e-6).verdict == Verdict::PositiveExponent);
    CHECK(classify_criticality({kHalfSqrt2, 0.5}, 0.0).verdict == Verdict::PositiveExponent);
}

TEST_CASE("property: classifier agrees with the estimator")
{
    // Near a critical energy gamma ~ delta^2, so grid points within 0.01 of
    // one get ten times the steps; everything else uses the base budget.
    for (double v : {0.5, kHalfSqrt2, 1.0, kSqrt2, 2.0}) {
        const DimerParams params{v, 0.5};
        std::vector<double> critical;
        if (v <= 1.0) {
            critical.push_back(-v);
            critical.push_back(v);
        }
        if (v == kHalfSqrt2) {
            critical.push_back(-3.0 * kHalfSqrt2);
            critical.push_back(3.0 * kHalfSqrt2);
        }
        if (v == kSqrt2) {
            critical.push_back(0.0);
        }
        std::vector<double> grid = hull_grid(v, 201);
        for (double c : critical) {
            grid.push_back(c);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end(),
                               [](double a, double b) { return std::abs(a - b) <= kCriticalTolerance; }),
                   grid.end());

        std::size_t n_positive = 0;
        for (double e : grid) {
            const Verdict verdict = classify_criticality(params, e).verdict;
            const bool near = std::any_of(critical.begin(), critical.end(),
                                          [&](double c) { return std::abs(e - c) < 0.01; });
            if (verdict == Verdict::WalkCritical) {
                continue;  // covered by the sqrt(n) scaling check
            }
            const auto est = estimate_gamma(params, e, near ? 1000000 : 100000, near ? 16 : 8, 42);
            CAPTURE(v);
            CAPTURE(e);
            if (verdict == Verdict::ResonanceCritical) {
                CHECK(std::abs(est.gamma_per_dimer) <= 5e-3);
            } else {
                ++n_positive;
                CHECK(est.gamma_per_dimer > 3.0 * est.std_error);
            }
        }
        CHECK(n_positive >= 195);
    }
}

TEST_CASE("exact critical evaluation agrees with floating products on short words")
{
    struct Couple {
        double v;
        double e;
    };
    for (Couple c : {Couple{kSqrt2, 0.0}, Couple{kHalfSqrt2, -3.0 * kHalfSqrt2}, Couple{kHalfSqrt2, 3.0 * kHalfSqrt2}}) {
        for (std::size_t n = 1; n <= 24; ++n) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const double exact = accumulate_log_growth_exact({c.v, 0.4}, c.e, n, seed, {0.3, -0.8});
                const double floating = accumulate_log_growth({c.v, 0.4}, c.e, n, seed, {0.3, -0.8});
                REQUIRE(std::abs(exact - floating) <= 1e-8 * std::max(1.0, std::abs(floating)));
            }
        }
    }
    CHECK_THROWS_AS(accumulate_log_growth_exact({0.5, 0.5}, 0.0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(accumulate_log_growth_exact({kSqrt2, 0.5}, 0.0, 10, 1, {0.0, 0.0}), InvalidArgument);
}

TEST_CASE("evaluation mode selection")
{
    const DimerParams params{kSqrt2, 0.5};
    GammaOptions exact;
    exact.evaluation = ProductEvaluation::ExactCritical;
    GammaOptions floating;
    floating.evaluation = ProductEvaluation::Floating;
    const auto a = estimate_gamma(params, 0.0, 20000, 6, 5);
    const auto b = estimate_gamma(params, 0.0, 20000, 6, 5, exact);
    const auto c = estimate_gamma(params, 0.0, 20000, 6, 5, floating);
    CHECK(a.gamma_per_dimer == b.gamma_per_dimer);
    CHECK(a.gamma_per_dimer != c.gamma_per_dimer);
    CHECK_THROWS_AS(estimate_gamma({0.5, 0.5}, 0.0, 20000, 2, 5, exact), InvalidArgument);
}

TEST_CASE("floating products do not resolve the walk-critical cancellation")
{
    // V = sqrt(2) is rounded; the error is amplified by lambda^{2|V_k|} and the
    // floating estimate stalls at a spurious positive value instead of decaying.
    GammaOptions floating;
    floating.evaluation = ProductEvaluation::Floating;
    const auto a = estimate_gamma({kSqrt2, 0.5}, 0.0, 100000, 20, 42, floating);
    const auto b = estimate_gamma({kSqrt2, 0.5}, 0.0, 400000, 20, 42, floating);
    CHECK(b.gamma_per_dimer / a.gamma_per_dimer > 0.8);
}

TEST_CASE("walk-critical scaling and stability away from criticality")
{
    struct Couple {
        double v;
        double e;
    };
    for (Couple c : {Couple{kSqrt2, 0.0}, Couple{kHalfSqrt2, -3.0 * kHalfSqrt2}, Couple{kHalfSqrt2, 3.0 * kHalfSqrt2}}) {
        const auto a = estimate_gamma({c.v, 0.5}, c.e, 100000, 400, 42);
        const auto b = estimate_gamma({c.v, 0.5}, c.e, 400000, 400, 42);
        const double ratio = b.gamma_per_dimer / a.gamma_per_dimer;
        CAPTURE(c.v);
        CAPTURE(c.e);
        CHECK(ratio >= 0.35);
        CHECK(ratio <= 0.65);
    }
    for (Couple c : {Couple{kSqrt2, 1.0}, Couple{kSqrt2, -2.0}, Couple{kHalfSqrt2, 0.0}, Couple{kHalfSqrt2, 1.5}}) {
        const auto a = estimate_gamma({c.v, 0.5}, c.e, 100000, 20, 42);
        const auto b = estimate_gamma({c.v, 0.5}, c.e, 400000, 20, 42);
        CHECK(std::abs(b.gamma_per_dimer / a.gamma_per_dimer - 1.0) <= 0.1);
    }
}

TEST_CASE("vanishing-exponent fit on synthetic data")
{
    std::vector<VanishingSample> quad;
    std::vector<VanishingSample> lin;
    for (double d : {0.02, 0.04, 0.08, 0.16}) {
        for (int side : {-1, 1}) {
            quad.push_back({d, side, 3.0 * d * d, 1e-9});
            lin.push_back({d, side, 0.5 * d, 1e-9});
        }
    }
    const VanishingFit q = fit_vanishing_exponent(quad);
    CHECK(q.pooled_slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(q.left_slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(q.right_slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(q.points_used == 8);
    CHECK(fit_vanishing_exponent(lin).pooled_slope == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vanishing-exponent fit excludes weak points")
{
    std::vector<VanishingSample> s;
    for (double d : {0.02, 0.04, 0.08, 0.16}) {
        s.push_back({d, +1, d * d, 1e-9});
        s.push_back({d, -1, d * d, d > 0.05 ? 1e-9 : 1.0});
    }
    const VanishingFit f = fit_vanishing_exponent(s);
    CHECK(f.points_used == 6);
    CHECK(f.pooled_slope == doctest::Approx(2.0));

    std::vector<VanishingSample> weak;
    for (double d : {0.02, 0.04, 0.08, 0.16}) {
        weak.push_back({d, +1, d * d, d < 0.1 ? 1.0 : 1e-9});
        weak.push_back({d, -1, d * d, 1.0});
    }
    CHECK_THROWS_AS(fit_vanishing_exponent(weak), InsufficientSignal);
}

TEST_CASE("quadratic vanishing input checks")
{
    const std::vector<double> offsets{0.02, 0.04, 0.08, 0.16};
    CHECK_THROWS_AS(fit_quadratic_vanishing({0.5, 0.5}, 0.0, offsets, 1000, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(fit_quadratic_vanishing({2.0, 0.5}, 2.0, offsets, 1000, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(fit_quadratic_vanishing({0.5, 0.5}, 0.5, std::vector<double>{0.02, 0.04}, 1000, 1, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(fit_quadratic_vanishing({0.5, 0.5}, 0.5, std::vector<double>{-0.02, 0.04, 0.08}, 1000, 1, 1),
                    InvalidArgument);
}

TEST_CASE("quadratic vanishing at the resonance")
{
    const std::vector<double> offsets{0.02, 0.04, 0.08, 0.16};
    const VanishingFit f = fit_quadratic_vanishing({0.5, 0.5}, 0.5, offsets, 1000000, 20, 42);
    CHECK(std::abs(f.pooled_slope - 2.0) <= 0.3);
    CHECK(f.samples.size() == 8);
}
