#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "facet/defaults.hpp"
#include "facet/types.hpp"

namespace facet::ward {

// One agglomeration step: cluster `absorber` took over the members of
// `absorbed` at the given merge cost.  Cluster ids are the index of the point
// that founded the cluster; an id can absorb several times but be absorbed
// only once.
struct MergeEvent {
    std::uint32_t absorber = 0;
    std::uint32_t absorbed = 0;
    double distance = 0.0;
    std::uint32_t resulting_size = 0;
};

// Full dendrogram in merge order: exactly initial_count - 1 events for a
// non-empty input.
struct MergeHistory {
    std::uint32_t initial_count = 0;
    std::vector<MergeEvent> events;
};

// Flat partition.  Clusters are sorted by their smallest member, members
// ascending; assignment maps point index -> cluster ordinal.  Every point
// appears in exactly one cluster.
struct ClusterSet {
    std::vector<std::vector<std::uint32_t>> clusters;
    std::vector<std::uint32_t> assignment;
};

// Instrumentation for the chain run.  The two violation counters stay zero
// for a correct implementation (they correspond to the reducibility guarantee
// for the merge-cost update, and to stack uniqueness); debug builds also
// assert on them.
struct ChainStats {
    std::uint64_t pushes = 0;
    std::uint64_t merges = 0;
    std::uint64_t max_stack_depth = 0;
    std::uint64_t lemma_violations = 0;       // update produced cost < min(d_ik, d_jk) - 1e-9
    std::uint64_t double_push_violations = 0; // id pushed while already on the stack
};

// Cost of merging (C_i u C_j) with C_k given the pairwise costs and cluster
// sizes; the recurrence that lets the chain update costs in O(1) per pair.
// Initial pairwise cost is the full squared Euclidean distance (not halved),
// which fixes the scale of every threshold in this project.
double lance_williams_update(double d_ik, double d_jk, double d_ij,
                             std::size_t n_i, std::size_t n_j, std::size_t n_k);

// Bottom-up Ward clustering with a stack-based nearest-neighbor chain.
// O(m^2) time, O(m^2) memory for the pairwise cost table.  Deterministic:
// equal-cost nearest neighbors resolve to the lowest cluster id.  Inputs
// beyond point_cap are rejected.
MergeHistory build_dendrogram(const PointSet& points, ChainStats* stats = nullptr,
                              std::size_t point_cap = defaults::kPointCap);

// Cuts a dendrogram into a flat partition: walk events by (distance desc,
// absorber asc, absorbed asc) and accept any merged cluster whose cost is at
// most alpha and whose members are disjoint from every cluster accepted so
// far; points never covered become singletons.
ClusterSet extract_clusters(const MergeHistory& history, double alpha);

// build_dendrogram + extract_clusters in one call.
std::pair<MergeHistory, ClusterSet> cluster(const PointSet& points, double alpha,
                                            ChainStats* stats = nullptr,
                                            std::size_t point_cap = defaults::kPointCap);

// Reference implementation for validation: O(m^3) greedy search that merges
// the globally closest pair each step, computing merge costs directly from
// cluster sizes and centroids rather than the pairwise recurrence.  Intended
// for test-scale inputs (m <= 256).  Ties resolve to the lexicographically
// smallest (absorbed, absorber) index pair.  Its merge costs are
// non-decreasing over the run.
MergeHistory naive_reference(const PointSet& points);

} // namespace facet::ward
