#include "dimer/criticalwalk.hpp"
#include "dimer/dynamics.hpp"
#include "dimer/lyapunov.hpp"
#include "dimer/tridiagonal.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

namespace {

using namespace dimer;

void BM_GrowthLoop(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const DimerParams params{0.5, 0.5};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(accumulate_log_growth(params, 0.3, n, seed++));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_GrowthLoop)->Arg(1 << 16)->Arg(1 << 20);

void BM_EstimateGamma(benchmark::State& state)
{
    const DimerParams params{0.5, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_gamma(params, 0.3, 1 << 18, 8, 42, {.threads = 1}));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 8 * (1 << 18));
}
BENCHMARK(BM_EstimateGamma)->Unit(benchmark::kMillisecond);

void BM_GrowthFromValues(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const DisorderRealization w = sample_disorder({0.5, 0.5}, n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(accumulate_log_growth(w.dimer_values(), 0.3));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_GrowthFromValues)->Arg(1 << 16);

void BM_GrowthExactCritical(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const DimerParams params{std::sqrt(0.5), 0.5};
    const double energy = -3.0 * std::sqrt(0.5);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(accumulate_log_growth_exact(params, energy, n, seed++));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_GrowthExactCritical)->Arg(1 << 20);

void BM_EigenTridiagonal(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const DisorderRealization w = sample_disorder({2.0, 0.5}, n / 2, 5);
    std::vector<double> diag(n);
    for (std::size_t x = 0; x < n; ++x) {
        diag[x] = w.site_value(x);
    }
    const std::vector<double> off(n - 1, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen_tridiagonal(diag, off));
    }
}
BENCHMARK(BM_EigenTridiagonal)->Arg(128)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ReduceWord(benchmark::State& state)
{
    const auto len = static_cast<std::size_t>(state.range(0));
    const CriticalCoupleAlgebra alg = build_algebra(CriticalCouple::HalfSqrt2);
    const Word word = random_word(len, 0.5, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduce_word(word, alg));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_ReduceWord)->Arg(200)->Arg(1 << 14);

void BM_MomentSeries(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SpectralData sd = diagonalize(sample_disorder({2.0, 0.5}, n / 2, 11), n);
    const InitialState psi = InitialState::delta(n, n / 2);
    const std::vector<double> times = log_spaced(1.0, 1000.0, 61);
    for (auto _ : state) {
        benchmark::DoNotOptimize(moment_series(sd, psi.amplitudes, {-4.0, 4.0}, 2.0, times));
    }
}
BENCHMARK(BM_MomentSeries)->Arg(512)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
