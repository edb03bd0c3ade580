#include <benchmark/benchmark.h>

#include <random>

#include "mtem/distance.hpp"
#include "mtem/energy.hpp"
#include "mtem/pipeline.hpp"
#include "mtem/synthgen.hpp"

namespace {

mtem::BitMask sparse_mask(int side, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(density);
    mtem::BitMask m(side, side);
    for (std::size_t i = 0; i < m.size(); ++i) m.set(i, bit(rng));
    if (m.none()) m.set(0);
    return m;
}

void BM_DistanceTransform(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto seed = sparse_mask(side, 0.01, 1);
    for (auto _ : state) benchmark::DoNotOptimize(mtem::distance_transform(seed));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_DistanceTransform)->Arg(256)->Arg(1024);

// Contour-cleaning problem on random masks: dense domain, two sparse seeds.
void BM_Minimize(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    mtem::SeedProblem p{sparse_mask(side, 0.4, 2), sparse_mask(side, 0.05, 3), sparse_mask(side, 0.05, 4), 1.0};
    const auto costs = mtem::data_costs(p);
    for (auto _ : state) benchmark::DoNotOptimize(mtem::minimize(p, costs));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Minimize)->Arg(128)->Arg(512);

void BM_Segment(benchmark::State& state) {
    mtem::SynthSpec calib;
    calib.seed = 7;
    const auto reference = mtem::generate(calib);
    const auto spec = mtem::derive_thresholds(reference.bands, reference.ground_truth);
    mtem::SynthSpec s;
    s.seed = 8;
    s.width = s.height = static_cast<int>(state.range(0));
    const auto fragment = mtem::generate(s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtem::segment(fragment.bands.band(1), fragment.bands.band(12), spec));
    }
    state.SetItemsProcessed(state.iterations() * s.width * s.height);
}
BENCHMARK(BM_Segment)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
