#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "facet/defaults.hpp"
#include "facet/pin_store.hpp"
#include "facet/rng.hpp"
#include "facet/types.hpp"

namespace facet::ann {

struct IndexConfig {
    std::uint32_t max_neighbors = defaults::kMaxNeighbors; // per-node degree target
    std::uint32_t build_beam = defaults::kBuildBeam;
    std::uint32_t query_beam = defaults::kQueryBeam;
    std::uint64_t seed = defaults::kSeed;
};

struct RefineConfig {
    double quality_floor = defaults::kQualityFloor;
    double dedup_threshold = defaults::kDedupThreshold; // in (0, 1]
};

struct RefineStats {
    std::size_t dropped_quality = 0;
    std::size_t dropped_duplicate = 0;
};

// Serving-pool selection: drop pins below the quality floor, then scan the
// survivors in ascending pin id and greedily drop any pin whose cosine
// similarity to an already accepted pin reaches the dedup threshold.  The
// exact scan costs O(n * accepted * d): fine for catalog-refresh scale, not
// for hot paths.  Returns accepted ids in ascending order.
std::vector<PinId> refine_pool(const PinStore& store, const RefineConfig& config,
                               RefineStats* stats = nullptr);

struct Neighbor {
    PinId pin = 0;
    double distance = 0.0; // cosine distance, in [0, 2]
};

// Brute-force exact k-nearest-neighbors over `pool` by cosine distance; the
// ground truth the graph index is measured against.  Ties resolve to the
// lower pin id.
std::vector<Neighbor> exact_knn(const PinStore& store, std::span<const PinId> pool,
                                std::span<const float> query, std::size_t k);

// Navigable small-world graph over L2-normalized copies of the pool
// embeddings, so inner product equals cosine similarity.  Build is
// single-writer and deterministic given the seed (geometric level draws,
// ascending-id insertion, total (distance, id) ordering everywhere).  After
// the build every layer's adjacency is made symmetric by adding missing
// reverse edges, which can leave some degrees above the target.  Queries are
// lock-free readers.
class GraphIndex {
public:
    // Moves transfer the traversal counter; copies are disabled (share via
    // reference, the index is immutable after build).
    GraphIndex(GraphIndex&& other) noexcept;
    GraphIndex& operator=(GraphIndex&& other) noexcept;
    GraphIndex(const GraphIndex&) = delete;
    GraphIndex& operator=(const GraphIndex&) = delete;

    // Pool ids must exist in the store and have non-zero embeddings.
    static GraphIndex build(const PinStore& store, std::span<const PinId> pool,
                            const IndexConfig& config);

    // k nearest pool pins by cosine distance, ascending (distance, id).
    // `beam` widens the layer-0 search frontier; 0 means the configured
    // default.  The query dimension must match the index.
    std::vector<Neighbor> query(std::span<const float> query, std::size_t k,
                                std::size_t beam = 0) const;

    std::size_t size() const { return pins_.size(); }
    std::size_t dimension() const { return dimension_; }
    const IndexConfig& config() const { return config_; }
    const std::vector<PinId>& pins() const { return pins_; }
    bool contains(PinId pin) const;

    // Total graph searches answered; the medoid cache divides this.
    std::uint64_t traversals() const { return traversals_.load(std::memory_order_relaxed); }

    // Versioned little-endian binary format, atomic replace on save.
    void save(const std::filesystem::path& path) const;
    static GraphIndex load(const std::filesystem::path& path);

    // Layer-0 degree histogram support and adjacency access for tests.
    std::span<const std::uint32_t> neighbors_on_layer(std::size_t node, std::size_t layer) const;
    std::size_t level_of(std::size_t node) const { return levels_[node]; }

private:
    GraphIndex() = default;

    double dist_to(std::span<const float> q, std::uint32_t node) const;
    void search_layer(std::span<const float> q, std::uint32_t entry, std::size_t beam,
                      std::size_t layer, std::vector<std::pair<double, std::uint32_t>>& out) const;
    std::vector<std::uint32_t> select_neighbors(std::uint32_t node,
                                                std::span<const std::pair<double, std::uint32_t>>
                                                    candidates,
                                                std::size_t want) const;

    std::size_t dimension_ = 0;
    IndexConfig config_;
    std::vector<PinId> pins_;            // ascending; node index -> pin id
    std::vector<float> vectors_;         // normalized, node-major
    std::vector<std::uint32_t> levels_;  // top layer per node
    std::uint32_t entry_point_ = 0;
    std::uint32_t max_level_ = 0;
    // adjacency_[layer][node] is a neighbor list; layer 0 sized 2M, others M.
    std::vector<std::vector<std::vector<std::uint32_t>>> adjacency_;
    mutable std::atomic<std::uint64_t> traversals_{0};
};

} // namespace facet::ann
