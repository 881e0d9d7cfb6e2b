#include <benchmark/benchmark.h>

#include "filtlab/expansion.hpp"
#include "filtlab/simulate.hpp"
#include "filtlab/stats.hpp"

using namespace filtlab;

static void BM_SimulateBM(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    for (auto _ : state) {
        PathEnsemble B = simulate_bm(grid, 256, 42);
        benchmark::DoNotOptimize(B.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 256 * grid.n_steps());
}
BENCHMARK(BM_SimulateBM)->Arg(8)->Arg(10)->Arg(12);

static void BM_EulerMaruyamaOU(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    DiffusionModel model = ou_model(1.0, 1.0);
    for (auto _ : state) {
        PathEnsemble X = simulate_diffusion_em(model, grid, 0.5, 256, 42);
        benchmark::DoNotOptimize(X.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 256 * grid.n_steps());
}
BENCHMARK(BM_EulerMaruyamaOU)->Arg(8)->Arg(10)->Arg(12);

static void BM_ReversedClosed(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    PathEnsemble B = simulate_bm(grid, 128, 42);
    TransitionDensity density = gaussian_density();
    for (auto _ : state) {
        DecompositionEnsemble d = compensator_reversed_closed(B, B, density, 0.45);
        benchmark::DoNotOptimize(d.finite_variation.data().data());
    }
}
BENCHMARK(BM_ReversedClosed)->Arg(10)->Arg(12);

static void BM_PitmanCompensator(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    PathEnsemble Z = simulate_bessel3(grid, 128, 42);
    PathEnsemble X = future_infimum_ensemble(Z, TailRule::exact_bessel3, 42);
    for (auto _ : state) {
        DecompositionEnsemble d = compensator_pitman(Z, X);
        benchmark::DoNotOptimize(d.martingale.data().data());
    }
}
BENCHMARK(BM_PitmanCompensator)->Arg(10)->Arg(12);

static void BM_HonestBessel(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    PathEnsemble Z = simulate_bessel3(grid, 64, 42);
    PathEnsemble X = future_infimum_bridge_ensemble(Z, TailRule::exact_bessel3, 42);
    for (auto _ : state) {
        DecompositionEnsemble d = compensator_honest_bessel(Z, X, 0.2);
        benchmark::DoNotOptimize(d.finite_variation.data().data());
    }
}
BENCHMARK(BM_HonestBessel)->Arg(8)->Arg(10);

static void BM_QuadraticVariation(benchmark::State& state) {
    TimeGrid grid = make_uniform_grid(1.0, std::size_t(1) << state.range(0));
    PathEnsemble B = simulate_bm(grid, 1, 42);
    SamplePath p = B.path(0);
    for (auto _ : state) {
        SamplePath qv = quadratic_variation(p);
        benchmark::DoNotOptimize(qv.values.data());
    }
}
BENCHMARK(BM_QuadraticVariation)->Arg(12)->Arg(14);

BENCHMARK_MAIN();
