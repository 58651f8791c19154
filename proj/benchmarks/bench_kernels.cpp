// Throughput of the inner kernels at desk-scale resolutions.
#include "lps/adjoint.hpp"
#include "lps/flow_solver.hpp"
#include "lps/manifold.hpp"

#include <benchmark/benchmark.h>

using namespace lps;

namespace {

void BM_RoundTripFFT(benchmark::State& state) {
    const WaveGrid g(int(state.range(0)));
    auto u = random_solenoidal(g, 1);
    for (auto _ : state) {
        u = to_spectral(to_physical(u), FieldRole::velocity);
        benchmark::DoNotOptimize(u);
    }
}

void BM_NonlinearTerm(benchmark::State& state) {
    const WaveGrid g(int(state.range(0)));
    const auto u = random_solenoidal(g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(nonlinear_term(u));
}

void BM_DealiasFilter(benchmark::State& state) {
    const WaveGrid g(int(state.range(0)));
    const auto u = random_solenoidal(g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(dealias_filter(u));
}

void BM_RK4Step(benchmark::State& state) {
    const WaveGrid g(int(state.range(0)));
    auto u = random_solenoidal(g, 1);
    for (auto _ : state) {
        u = step_forward(u, 1e-4, 0.01);
        benchmark::DoNotOptimize(u);
    }
}

void BM_AdjointStep(benchmark::State& state) {
    const int n = int(state.range(0));
    constexpr int steps = 8;
    SolverConfig c;
    c.n = n;
    c.dt = 1e-4;
    c.t_final = steps * 1e-4;
    const auto traj = solve_forward(random_solenoidal(WaveGrid(n), 1), c);
    AdjointConfig a;
    a.forward = &traj;
    for (auto _ : state) benchmark::DoNotOptimize(solve_adjoint(a));
    state.counters["per_step"] = benchmark::Counter(double(steps), benchmark::Counter::kIsIterationInvariantRate |
                                                                       benchmark::Counter::kInvert);
}

void BM_SobolevGradient(benchmark::State& state) {
    const WaveGrid g(int(state.range(0)));
    const auto u = random_solenoidal(g, 1);
    const SobolevConfig sob;
    for (auto _ : state) benchmark::DoNotOptimize(sobolev_gradient(u, sob));
}

}  // namespace

BENCHMARK(BM_RoundTripFFT)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NonlinearTerm)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DealiasFilter)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RK4Step)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SobolevGradient)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
