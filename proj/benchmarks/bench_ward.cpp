#include <benchmark/benchmark.h>

#include "facet/profile.hpp"
#include "facet/rng.hpp"
#include "facet/types.hpp"
#include "facet/ward.hpp"

using namespace facet;

namespace {

PointSet random_points(std::size_t m, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    PointSet points(d);
    std::vector<float> v(d);
    for (std::size_t i = 0; i < m; ++i) {
        for (auto& x : v) x = static_cast<float>(rng.next_gaussian());
        points.add(v);
    }
    return points;
}

void BM_ChainDendrogram(benchmark::State& state) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 16, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ward::build_dendrogram(points));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainDendrogram)->Arg(32)->Arg(128)->Arg(512)->Arg(2000)->Complexity();

void BM_NaiveDendrogram(benchmark::State& state) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 16, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ward::naive_reference(points));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NaiveDendrogram)->Arg(32)->Arg(128)->Complexity();

void BM_FlatCut(benchmark::State& state) {
    const auto points = random_points(512, 16, 9);
    const auto history = ward::build_dendrogram(points);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ward::extract_clusters(history, 8.0));
    }
}
BENCHMARK(BM_FlatCut);

void BM_Medoid(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    PinStore store(64);
    std::vector<float> v(64);
    std::vector<PinId> members;
    for (PinId id = 1; id <= m; ++id) {
        for (auto& x : v) x = static_cast<float>(rng.next_gaussian());
        store.add(id, v);
        members.push_back(id);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_medoid(members, store));
    }
}
BENCHMARK(BM_Medoid)->Arg(16)->Arg(64)->Arg(256);

} // namespace

BENCHMARK_MAIN();
