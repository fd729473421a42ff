#include "facet/retrieval.hpp"

#include <algorithm>
#include <unordered_map>

#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/sampling.hpp"

namespace facet::retrieval {

RecommendationSet fetch_candidates(std::span<const QuerySpec> queries,
                                   const ann::GraphIndex& index, ann::MedoidCache* cache,
                                   const PinStore& store, const RetrievalConfig& config,
                                   const std::unordered_set<PinId>* exclude) {
    RecommendationSet out;
    if (queries.empty()) return out;
    const std::size_t per_query = config.budget / queries.size();
    if (per_query == 0)
        throw ValidationError("budget " + std::to_string(config.budget) +
                              " is too small for " + std::to_string(queries.size()) +
                              " queries");

    std::unordered_map<PinId, Candidate> best;
    best.reserve(per_query * queries.size());
    for (const QuerySpec& q : queries) {
        std::vector<ann::Neighbor> got;
        if (q.medoid) {
            got = ann::query_by_medoid(index, cache, store, *q.medoid, per_query, config.beam);
            out.sampled_medoids.push_back(*q.medoid);
        } else {
            got = index.query(q.embedding, per_query, std::max(config.beam, per_query));
        }
        for (const ann::Neighbor& n : got) {
            if (exclude && exclude->count(n.pin)) continue;
            const double similarity = 1.0 - n.distance;
            auto [it, inserted] =
                best.emplace(n.pin, Candidate{n.pin, similarity, q.medoid.value_or(0)});
            if (!inserted && similarity > it->second.similarity) {
                it->second.similarity = similarity;
                it->second.source_medoid = q.medoid.value_or(0);
            }
        }
    }

    out.pins.reserve(best.size());
    for (const auto& [pin, cand] : best) out.pins.push_back(cand);
    std::sort(out.pins.begin(), out.pins.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.pin < b.pin;
    });
    return out;
}

RecommendationSet recommend(const UserProfile& profile, const ann::GraphIndex& index,
                            ann::MedoidCache* cache, const PinStore& store,
                            const RetrievalConfig& config, Rng& rng,
                            const std::unordered_set<PinId>* exclude) {
    if (profile.summaries.empty())
        throw ValidationError("cannot recommend from an empty profile (user " +
                              std::to_string(profile.user) + ")");
    if (config.sample_e == 0) throw ValidationError("sample count must be at least 1");

    std::vector<std::pair<std::uint64_t, double>> weighted;
    weighted.reserve(profile.summaries.size());
    for (const ClusterSummary& s : profile.summaries)
        weighted.emplace_back(s.medoid, s.importance);

    const std::vector<std::uint64_t> sampled =
        weighted_sample_without_replacement(weighted, config.sample_e, rng);

    std::vector<QuerySpec> queries;
    queries.reserve(sampled.size());
    for (const std::uint64_t medoid : sampled) {
        QuerySpec q;
        q.medoid = medoid;
        queries.push_back(std::move(q));
    }
    return fetch_candidates(queries, index, cache, store, config, exclude);
}

Diversity diversity(std::span<const PinId> pins, const PinStore& store) {
    if (pins.size() < 2) return {0.0, false};
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pins.size(); ++i)
        for (std::size_t j = i + 1; j < pins.size(); ++j) {
            total += cosine_distance(store.embedding(pins[i]), store.embedding(pins[j]));
            ++pairs;
        }
    return {total / static_cast<double>(pairs), true};
}

} // namespace facet::retrieval
