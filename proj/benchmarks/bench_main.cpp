#include <benchmark/benchmark.h>

#include "lobq/mc.hpp"
#include "lobq/model.hpp"
#include "lobq/quadrature.hpp"
#include "lobq/series.hpp"

namespace {

using namespace lobq;

const CorrelationTriple kMild{-0.2, 0.3, -0.1};

void BM_GaussLegendre(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto rule = gauss_legendre(n, 0.0, 1.0);
        benchmark::DoNotOptimize(rule);
    }
}
BENCHMARK(BM_GaussLegendre)->Arg(80)->Arg(200);

void BM_SeriesAssemble(benchmark::State& state) {
    const int n_modes = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sys = assemble_system(kMild, Outcome::Trade, n_modes);
        benchmark::DoNotOptimize(sys);
    }
}
BENCHMARK(BM_SeriesAssemble)->Arg(10)->Arg(40);

void BM_SeriesSolveAll(benchmark::State& state) {
    SolverOptions opt;
    opt.n_modes = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sols = solve_all_events(kMild, opt);
        benchmark::DoNotOptimize(sols);
    }
}
BENCHMARK(BM_SeriesSolveAll)->Arg(10)->Arg(40);

void BM_SeriesEval(benchmark::State& state) {
    SolverOptions opt;
    opt.n_modes = 40;
    const EventSolutions sols = solve_all_events(kMild, opt);
    const OrthantState s{1.2, 0.8, 2.0};
    for (auto _ : state) {
        auto p = event_probabilities(sols, s, kMild);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_SeriesEval);

// Steps/second of the Euler+bridge engine: fixed horizon so every path runs
// the full step budget.
void BM_McSteps(benchmark::State& state) {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 256;
    cfg.horizon = 1.0;  // 1000 steps per path, far boundaries below
    cfg.n_threads = 1;
    const OrthantState s{50.0, 50.0, 50.0};
    for (auto _ : state) {
        auto r = simulate_first_event(s, kMild, cfg);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths *
                            static_cast<std::int64_t>(cfg.horizon / cfg.dt));
}
BENCHMARK(BM_McSteps)->Unit(benchmark::kMillisecond);

void BM_McFirstEvent(benchmark::State& state) {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 1024;
    cfg.horizon = 50.0;
    cfg.n_threads = 1;
    const OrthantState s{1.0, 1.0, 3.5};
    for (auto _ : state) {
        auto r = simulate_first_event(s, kMild, cfg);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}
BENCHMARK(BM_McFirstEvent)->Unit(benchmark::kMillisecond);

void BM_McSideTrade(benchmark::State& state) {
    ModelParams params;
    params.corr = kMild;
    params.phi0 = 1.2;
    SimConfig cfg;
    cfg.dt = 0.05;
    cfg.n_paths = 1024;
    cfg.horizon = 100.0;
    cfg.n_threads = 1;
    const OrthantState s{1.0, 1.0, params.phi0};
    for (auto _ : state) {
        auto r = simulate_until_side_trade(s, params, Side::Bid, cfg);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}
BENCHMARK(BM_McSideTrade)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
