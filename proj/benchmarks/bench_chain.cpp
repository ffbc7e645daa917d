#include <benchmark/benchmark.h>

#include "glasslab/sampler.hpp"

namespace {

using namespace glasslab;

void bm_chain_sk(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    ModelSpec spec;
    spec.kind = ModelKind::sk_ising;
    spec.beta = 0.3;
    spec.h = 0.4;
    const Disorder dis = sample_disorder(spec, n, 7);
    mcmc::ChainConfig cfg;
    cfg.n_sweeps = 2000;
    cfg.burn_in = 100;
    cfg.keep_samples = false;
    for (auto _ : state) {
        auto stats = mcmc::run_chain(spec, dis, cfg, 2);
        benchmark::DoNotOptimize(stats.overlap_mean);
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_sweeps * n);
}

void bm_chain_st(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    ModelSpec spec;
    spec.kind = ModelKind::st;
    spec.kappa = 2.0;
    spec.h = 0.2;
    spec.alpha = 0.5;
    spec.u = neg_softplus_potential(0.5, 1.0);
    const Disorder dis = sample_disorder(spec, n, 7);
    mcmc::ChainConfig cfg;
    cfg.n_sweeps = 2000;
    cfg.burn_in = 500;
    cfg.keep_samples = false;
    for (auto _ : state) {
        auto stats = mcmc::run_chain(spec, dis, cfg, 2);
        benchmark::DoNotOptimize(stats.overlap_mean);
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_sweeps * n);
}

BENCHMARK(bm_chain_sk)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_chain_st)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace
