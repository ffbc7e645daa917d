#include <benchmark/benchmark.h>

#include "glasslab/rs.hpp"

namespace {

using namespace glasslab;

void bm_solve_sk(benchmark::State& state) {
    const auto quad = rs::make_quadrature(61);
    for (auto _ : state) {
        auto sol = rs::solve_sk(0.3, 0.5, quad);
        benchmark::DoNotOptimize(sol.q);
    }
}

void bm_solve_st(benchmark::State& state) {
    const auto quad = rs::make_quadrature(61);
    const auto u = neg_softplus_potential(0.5, 1.0);
    for (auto _ : state) {
        auto sol = rs::solve_st(0.5, u, 2.0, 0.2, 1.0, quad);
        benchmark::DoNotOptimize(sol.v2);
    }
}

BENCHMARK(bm_solve_sk)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_solve_st)->Unit(benchmark::kMillisecond);

} // namespace
