#pragma once

#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "facet/medoid_cache.hpp"
#include "facet/profile.hpp"
#include "facet/rng.hpp"

namespace facet::retrieval {

struct RetrievalConfig {
    std::size_t sample_e = defaults::kSampleE; // interest summaries drawn per request
    std::size_t budget = defaults::kBudget;    // total candidate cap
    std::size_t beam = 0;                      // 0: the index default
};

struct Candidate {
    PinId pin = 0;
    double similarity = 0.0; // best cosine similarity to any sampled query
    PinId source_medoid = 0; // medoid that contributed the best similarity (0 if none)
};

// Final candidate list, ordered by similarity descending (ties by pin id);
// pin ids are distinct; never exceeds the budget; never contains a pin from
// `exclude`.
struct RecommendationSet {
    std::vector<Candidate> pins;
    std::vector<PinId> sampled_medoids;
};

// One retrieval query: an embedding plus the medoid id when the embedding is
// a catalog pin (which makes the shared cache applicable).
struct QuerySpec {
    std::vector<float> embedding;
    std::optional<PinId> medoid;
};

// Shared fetch-and-merge: floor(budget / queries) candidates per query,
// deduplicated keeping each pin's best similarity, minus excluded pins.
RecommendationSet fetch_candidates(std::span<const QuerySpec> queries,
                                   const ann::GraphIndex& index, ann::MedoidCache* cache,
                                   const PinStore& store, const RetrievalConfig& config,
                                   const std::unordered_set<PinId>* exclude);

// Full request path: sample min(e, #summaries) medoids without replacement
// proportionally to importance, fetch floor(budget / sampled) per medoid,
// merge.  The divisor is the number actually sampled, so a single-interest
// profile still receives the whole budget.  `exclude` carries pins the user
// already engaged (the caller knows that set; pass null to skip filtering).
// The profile must have at least one summary.
RecommendationSet recommend(const UserProfile& profile, const ann::GraphIndex& index,
                            ann::MedoidCache* cache, const PinStore& store,
                            const RetrievalConfig& config, Rng& rng,
                            const std::unordered_set<PinId>* exclude = nullptr);

// Mean pairwise cosine distance of the set; `defined` is false (value 0) for
// fewer than two pins.
struct Diversity {
    double value = 0.0;
    bool defined = false;
};
Diversity diversity(std::span<const PinId> pins, const PinStore& store);

} // namespace facet::retrieval
