#include <benchmark/benchmark.h>

#include "glasslab/exact.hpp"

namespace {

using namespace glasslab;

void bm_enumerate_sk(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    ModelSpec spec;
    spec.kind = ModelKind::sk_ising;
    spec.beta = 0.3;
    spec.h = 0.4;
    const Disorder dis = sample_disorder(spec, n, 7);
    for (auto _ : state) {
        auto summary = exact::enumerate(spec, dis, 2);
        benchmark::DoNotOptimize(summary.log_partition);
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

void bm_enumerate_sk_pair_corr(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    ModelSpec spec;
    spec.kind = ModelKind::sk_ising;
    spec.beta = 0.3;
    spec.h = 0.4;
    const Disorder dis = sample_disorder(spec, n, 7);
    exact::EnumerateOptions opt;
    opt.k = 2;
    opt.pair_corr = true;
    for (auto _ : state) {
        auto summary = exact::enumerate(spec, dis, opt);
        benchmark::DoNotOptimize(summary.log_partition);
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

BENCHMARK(bm_enumerate_sk)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_enumerate_sk_pair_corr)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

} // namespace
