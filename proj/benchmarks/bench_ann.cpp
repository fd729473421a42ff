#include <benchmark/benchmark.h>

#include "facet/ann.hpp"
#include "facet/medoid_cache.hpp"
#include "facet/rng.hpp"

using namespace facet;

namespace {

PinStore clustered_pins(std::size_t count, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t blobs = 25;
    std::vector<std::vector<float>> centers(blobs, std::vector<float>(dim));
    for (auto& center : centers) {
        for (auto& x : center) x = static_cast<float>(3.0 * rng.next_gaussian());
    }
    PinStore store(dim);
    std::vector<float> v(dim);
    for (PinId id = 1; id <= count; ++id) {
        const auto& center = centers[id % blobs];
        for (std::size_t j = 0; j < dim; ++j) {
            v[j] = center[j] + static_cast<float>(0.2 * rng.next_gaussian());
        }
        store.add(id, v);
    }
    return store;
}

void BM_IndexBuild(benchmark::State& state) {
    const auto store = clustered_pins(static_cast<std::size_t>(state.range(0)), 32, 21);
    const auto pool = store.ids();
    ann::IndexConfig config;
    config.build_beam = 100;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ann::GraphIndex::build(store, pool, config));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_IndexQuery(benchmark::State& state) {
    static const auto store = clustered_pins(20000, 32, 22);
    static const auto index = ann::GraphIndex::build(store, store.ids(), ann::IndexConfig{});
    Rng rng(5);
    std::vector<float> q(32);
    for (auto _ : state) {
        state.PauseTiming();
        const auto base = store.row(rng.next_below(store.size()));
        for (std::size_t j = 0; j < q.size(); ++j) {
            q[j] = base[j] + static_cast<float>(0.05 * rng.next_gaussian());
        }
        state.ResumeTiming();
        benchmark::DoNotOptimize(index.query(q, 10, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_IndexQuery)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_ExactKnn(benchmark::State& state) {
    static const auto store = clustered_pins(20000, 32, 22);
    static const auto pool = store.ids();
    Rng rng(6);
    std::vector<float> q(32);
    for (auto _ : state) {
        state.PauseTiming();
        const auto base = store.row(rng.next_below(store.size()));
        for (std::size_t j = 0; j < q.size(); ++j) {
            q[j] = base[j] + static_cast<float>(0.05 * rng.next_gaussian());
        }
        state.ResumeTiming();
        benchmark::DoNotOptimize(ann::exact_knn(store, pool, q, 10));
    }
}
BENCHMARK(BM_ExactKnn)->Unit(benchmark::kMicrosecond);

void BM_CachedMedoidQuery(benchmark::State& state) {
    static const auto store = clustered_pins(20000, 32, 23);
    static const auto index = ann::GraphIndex::build(store, store.ids(), ann::IndexConfig{});
    ann::MedoidCache cache(64);
    Rng rng(7);
    for (auto _ : state) {
        // 16 hot medoids: nearly every call is a cache hit.
        const PinId medoid = 1 + rng.next_below(16);
        benchmark::DoNotOptimize(
            ann::query_by_medoid(index, &cache, store, medoid, 20));
    }
}
BENCHMARK(BM_CachedMedoidQuery)->Unit(benchmark::kMicrosecond);

} // namespace
