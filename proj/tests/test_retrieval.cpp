#include <cmath>
#include <map>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/retrieval.hpp"
#include "facet/rng.hpp"

using namespace facet;

namespace {

// Three tight direction bundles on the unit circle, 40 pins each, plus the
// bundle anchors themselves as pins 1001..1003.  2-d keeps cosine geometry
// easy to reason about.
struct Scene {
    PinStore store{2};
    std::vector<PinId> pool;
    ann::GraphIndex index;

    Scene() : index(build_index()) {}

    ann::GraphIndex build_index() {
        Rng rng(101);
        const double anchors[3] = {0.0, 2.0943951023931953, 4.1887902047863905};
        std::vector<float> v(2);
        PinId next = 1;
        for (int b = 0; b < 3; ++b) {
            for (int i = 0; i < 40; ++i) {
                const double theta = anchors[b] + 0.15 * rng.next_gaussian();
                v[0] = static_cast<float>(std::cos(theta));
                v[1] = static_cast<float>(std::sin(theta));
                store.add(next++, v);
            }
        }
        for (int b = 0; b < 3; ++b) {
            v[0] = static_cast<float>(std::cos(anchors[b]));
            v[1] = static_cast<float>(std::sin(anchors[b]));
            store.add(1001 + b, v);
        }
        pool = store.ids();
        ann::IndexConfig config;
        config.max_neighbors = 8;
        config.build_beam = 48;
        config.query_beam = 48;
        return ann::GraphIndex::build(store, pool, config);
    }

    UserProfile profile_over(std::vector<ClusterSummary> summaries) const {
        UserProfile profile;
        profile.user = 1;
        profile.summaries = std::move(summaries);
        return profile;
    }
};

} // namespace

TEST_CASE("fetch splits the budget and keeps each pin's best similarity") {
    Scene scene;

    std::vector<retrieval::QuerySpec> queries(2);
    queries[0].embedding = {scene.store.embedding(1001)[0], scene.store.embedding(1001)[1]};
    queries[0].medoid = 1001;
    queries[1].embedding = {scene.store.embedding(1002)[0], scene.store.embedding(1002)[1]};
    queries[1].medoid = 1002;

    retrieval::RetrievalConfig config;
    config.budget = 21; // floor(21 / 2) = 10 per query
    const auto got = retrieval::fetch_candidates(queries, scene.index, nullptr,
                                                 scene.store, config, nullptr);
    CHECK(got.pins.size() <= 20);
    CHECK(got.pins.size() >= 15); // two bundles barely overlap

    // Distinct pins, ordered by similarity descending with id tie-break.
    std::unordered_set<PinId> seen;
    for (std::size_t i = 0; i < got.pins.size(); ++i) {
        CHECK(seen.insert(got.pins[i].pin).second);
        if (i > 0) {
            const auto& prev = got.pins[i - 1];
            const auto& cur = got.pins[i];
            const bool ordered = prev.similarity > cur.similarity ||
                                 (prev.similarity == cur.similarity && prev.pin < cur.pin);
            CHECK(ordered);
        }
        // Best similarity must match a direct computation against the
        // contributing query.  It round-trips through the index's float
        // distance, so the agreement is float-precision, not double.
        const auto& candidate = got.pins[i];
        REQUIRE((candidate.source_medoid == 1001 || candidate.source_medoid == 1002));
        const std::size_t q = candidate.source_medoid == 1001 ? 0 : 1;
        const double direct = cosine_similarity(queries[q].embedding,
                                                scene.store.embedding(candidate.pin));
        CHECK(candidate.similarity == doctest::Approx(direct).epsilon(1e-5));
    }
}

TEST_CASE("excluded pins never come back") {
    Scene scene;

    std::vector<retrieval::QuerySpec> queries(1);
    queries[0].embedding = {scene.store.embedding(1001)[0], scene.store.embedding(1001)[1]};
    queries[0].medoid = 1001;

    retrieval::RetrievalConfig config;
    config.budget = 10;
    const auto open = retrieval::fetch_candidates(queries, scene.index, nullptr,
                                                  scene.store, config, nullptr);
    REQUIRE(open.pins.size() == 10);

    std::unordered_set<PinId> exclude;
    for (std::size_t i = 0; i < 5; ++i) exclude.insert(open.pins[i].pin);
    const auto filtered = retrieval::fetch_candidates(queries, scene.index, nullptr,
                                                      scene.store, config, &exclude);
    for (const auto& candidate : filtered.pins) {
        CHECK(exclude.count(candidate.pin) == 0);
    }
}

TEST_CASE("a single-interest profile receives the whole budget") {
    Scene scene;
    const auto profile = scene.profile_over({{1001, 5.0, 5}});

    retrieval::RetrievalConfig config;
    config.sample_e = 3;
    config.budget = 24;
    Rng rng(1);
    const auto got = retrieval::recommend(profile, scene.index, nullptr, scene.store,
                                          config, rng);
    CHECK(got.sampled_medoids == std::vector<PinId>{1001});
    CHECK(got.pins.size() == 24);
    // Everything retrieved sits in the medoid's own bundle, so similarity
    // stays high.
    for (const auto& candidate : got.pins) {
        CHECK(candidate.similarity > 0.5);
        CHECK(candidate.source_medoid == 1001);
    }
}

TEST_CASE("medoid sampling follows importance without replacement") {
    Scene scene;
    const auto profile = scene.profile_over({
        {1001, 8.0, 8},
        {1002, 2.0, 2},
        {1003, 0.1, 1},
    });

    retrieval::RetrievalConfig config;
    config.sample_e = 2;
    config.budget = 20;

    std::map<PinId, int> first_pick;
    std::map<PinId, int> drawn;
    Rng rng(2024);
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        const auto got = retrieval::recommend(profile, scene.index, nullptr,
                                              scene.store, config, rng);
        REQUIRE(got.sampled_medoids.size() == 2);
        // Without replacement: the two draws differ.
        CHECK(got.sampled_medoids[0] != got.sampled_medoids[1]);
        ++first_pick[got.sampled_medoids[0]];
        for (const auto medoid : got.sampled_medoids) ++drawn[medoid];
    }
    // First draw lands on the dominant interest about 80% of the time.
    CHECK(first_pick[1001] > trials * 7 / 10);
    CHECK(first_pick[1001] < trials * 9 / 10);
    CHECK(drawn[1001] > drawn[1002]);
    CHECK(drawn[1002] > drawn[1003]);

    // e capped by the summary count: asking for 5 samples over 3 interests.
    retrieval::RetrievalConfig wide;
    wide.sample_e = 5;
    wide.budget = 30;
    const auto all = retrieval::recommend(profile, scene.index, nullptr, scene.store,
                                          wide, rng);
    CHECK(all.sampled_medoids.size() == 3);
}

TEST_CASE("recommend demands a non-empty profile") {
    Scene scene;
    const auto empty = scene.profile_over({});
    Rng rng(9);
    CHECK_THROWS_AS((void)retrieval::recommend(empty, scene.index, nullptr, scene.store,
                                               retrieval::RetrievalConfig{}, rng),
                    ValidationError);
}

TEST_CASE("recommendations are identical with and without the cache") {
    Scene scene;
    const auto profile = scene.profile_over({
        {1001, 4.0, 4},
        {1002, 3.0, 3},
        {1003, 2.0, 2},
    });

    retrieval::RetrievalConfig config;
    config.sample_e = 2;
    config.budget = 18;

    ann::MedoidCache cache(32);
    for (int trial = 0; trial < 10; ++trial) {
        // Same rng stream id on both sides: identical medoid draws.
        Rng with_cache(500 + trial);
        Rng without(500 + trial);
        const auto a = retrieval::recommend(profile, scene.index, &cache, scene.store,
                                            config, with_cache);
        const auto b = retrieval::recommend(profile, scene.index, nullptr, scene.store,
                                            config, without);
        REQUIRE(a.sampled_medoids == b.sampled_medoids);
        REQUIRE(a.pins.size() == b.pins.size());
        for (std::size_t i = 0; i < a.pins.size(); ++i) {
            CHECK(a.pins[i].pin == b.pins[i].pin);
            CHECK(a.pins[i].similarity == b.pins[i].similarity);
            CHECK(a.pins[i].source_medoid == b.pins[i].source_medoid);
        }
    }
    CHECK(cache.hits() > 0);
}

TEST_CASE("diversity is the mean pairwise cosine distance") {
    PinStore store(2);
    const auto add = [&](PinId id, float x, float y) {
        const float v[2] = {x, y};
        store.add(id, v);
    };
    add(1, 1.0f, 0.0f);
    add(2, 0.0f, 1.0f);
    add(3, -1.0f, 0.0f);

    const std::vector<PinId> empty;
    CHECK_FALSE(retrieval::diversity(empty, store).defined);
    const std::vector<PinId> one{1};
    CHECK_FALSE(retrieval::diversity(one, store).defined);

    const std::vector<PinId> pair{1, 2};
    const auto orthogonal = retrieval::diversity(pair, store);
    CHECK(orthogonal.defined);
    CHECK(orthogonal.value == doctest::Approx(1.0));

    // Pairs (1,2): 1, (1,3): 2, (2,3): 1 -> mean 4/3.
    const std::vector<PinId> trio{1, 2, 3};
    CHECK(retrieval::diversity(trio, store).value == doctest::Approx(4.0 / 3.0));

    // A spread-out set scores higher than a tight one.
    const std::vector<PinId> tight{1, 1, 1};
    CHECK(retrieval::diversity(tight, store).value == doctest::Approx(0.0));
}
