// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "dpre/montecarlo.hpp"

namespace {

dpre::McConfig config(int n)
{
    dpre::McConfig c;
    c.params = {2, 2, n};
    c.fixed_beta = 0.3;
    c.replicates = 2000;
    c.bootstrap_resamples = 500;
    return c;
}

void BM_SampleSerial(benchmark::State& state)
{
    const auto c = config(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dpre::sample_replicates_serial(c));
    }
    state.SetItemsProcessed(state.iterations() * c.replicates);
}

void BM_SampleParallel(benchmark::State& state)
{
    const auto c = config(static_cast<int>(state.range(0)));
    const int threads = omp_get_max_threads();
    for (auto _ : state) {
        benchmark::DoNotOptimize(dpre::sample_replicates(c, threads));
    }
    state.SetItemsProcessed(state.iterations() * c.replicates);
    state.counters["threads"] = threads;
}

void BM_BootstrapSerial(benchmark::State& state)
{
    const auto c = config(4);
    const auto values = dpre::sample_replicates_serial(c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dpre::bootstrap_serial(values, c));
    }
}

void BM_BootstrapParallel(benchmark::State& state)
{
    const auto c = config(4);
    const auto values = dpre::sample_replicates_serial(c);
    const int threads = omp_get_max_threads();
    for (auto _ : state) {
        benchmark::DoNotOptimize(dpre::bootstrap(values, c, threads));
    }
    state.counters["threads"] = threads;
}

} // namespace

BENCHMARK(BM_SampleSerial)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleParallel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
