#include "besovwf/grid.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/lp.hpp"
#include "besovwf/propagation.hpp"
#include "besovwf/wavefront.hpp"

#include <benchmark/benchmark.h>

using namespace besovwf;

namespace {

GridSpec grid2(std::size_t n) { return {2, n, 2.0 * std::numbers::pi}; }

void BM_Transform2D(benchmark::State& state)
{
    const GridSpec g = grid2(static_cast<std::size_t>(state.range(0)));
    const Field u = synthesize(synth::Gaussian{g.center(), 0.3}, g).field;
    for (auto _ : state) benchmark::DoNotOptimize(transform(u));
}
BENCHMARK(BM_Transform2D)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_PartitionReconstruct(benchmark::State& state)
{
    const GridSpec g = grid2(static_cast<std::size_t>(state.range(0)));
    const Field u = synthesize(synth::Delta{g.center()}, g).field;
    for (auto _ : state) {
        const LPPartition part = build_partition(g);
        benchmark::DoNotOptimize(block_sups(u, part));
    }
}
BENCHMARK(BM_PartitionReconstruct)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_LocalMeansNorm1D(benchmark::State& state)
{
    const GridSpec g{1, static_cast<std::size_t>(state.range(0)), 2.0 * std::numbers::pi};
    const Field u = synthesize(synth::Weierstrass{0.5, 1}, g).field;
    const Kernel k = make_kernel(0, 1);
    const LambdaLadder ladder = default_ladder(g, k);
    for (auto _ : state) benchmark::DoNotOptimize(local_means_norm(u, 0.5, k, ladder));
}
BENCHMARK(BM_LocalMeansNorm1D)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ScanPoint2D(benchmark::State& state)
{
    const GridSpec g = grid2(512);
    const Field u = synthesize(synth::Delta{g.center()}, g).field;
    ScanConfig cfg;
    cfg.fan = static_cast<int>(state.range(0));
    cfg.alphas = {-1.5};
    for (auto _ : state) benchmark::DoNotOptimize(wf_scan(u, {g.center()}, cfg));
}
BENCHMARK(BM_ScanPoint2D)->Arg(4)->Arg(8)->Iterations(2)->Unit(benchmark::kMillisecond);

void BM_HalfWaveEvolve(benchmark::State& state)
{
    const GridSpec g = grid2(static_cast<std::size_t>(state.range(0)));
    const Field u = synthesize(synth::Delta{g.center()}, g).field;
    const MultiplierSymbol a = MultiplierSymbol::half_wave();
    for (auto _ : state) benchmark::DoNotOptimize(evolve(u, a, 0.5));
}
BENCHMARK(BM_HalfWaveEvolve)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
