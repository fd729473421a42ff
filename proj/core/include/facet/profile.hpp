#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "facet/defaults.hpp"
#include "facet/pin_store.hpp"
#include "facet/types.hpp"
#include "facet/ward.hpp"

namespace facet {

enum class ProfileSource : std::uint8_t { batch, online };

struct ProfileVersion {
    std::int64_t date = 0; // civil day the profile reflects
    ProfileSource source = ProfileSource::batch;
};

// One interest: the medoid pin stands in for the cluster, importance is the
// decayed engagement mass, member_count the number of engagements.
struct ClusterSummary {
    PinId medoid = 0;
    double importance = 0.0;
    std::uint32_t member_count = 0;
};

// Summaries sorted by importance descending (ties by medoid id ascending);
// medoid ids are distinct.
struct UserProfile {
    UserId user = 0;
    ProfileVersion version;
    std::vector<ClusterSummary> summaries;
};

// Medoid of a multiset of pins: the member minimizing the sum of squared
// Euclidean distances to all members; ties resolve to the lowest pin id.
// Duplicate entries count as distinct points.  Members must be non-empty and
// present in the store.
PinId compute_medoid(std::span<const PinId> members, const PinStore& store);

// Arithmetic mean of the member embeddings (double accumulation, float32
// result).
std::vector<float> compute_centroid(std::span<const PinId> members, const PinStore& store);

// Sum over members of exp(-lambda * age_in_days), age measured from `now`
// (seconds).  lambda = 0 degrades to the member count.  Timestamps must not
// be in the future and lambda must be non-negative.
double compute_importance(std::span<const std::int64_t> timestamps, double lambda_per_day,
                          std::int64_t now);

// An engagement that survived windowing and has an embedding: the clustering
// unit.
struct ProfilePoint {
    PinId pin = 0;
    std::int64_t timestamp = 0;
};

struct ProfileParams {
    double alpha = defaults::kAlpha;
    double lambda = defaults::kLambda;
    std::size_t window_days = defaults::kWindowDays;
    std::size_t point_cap = defaults::kPointCap;
};

struct ProfileBuildStats {
    std::size_t usable_points = 0;
    std::size_t skipped_missing_embedding = 0;
    std::size_t dropped_over_cap = 0;
};

// Turns a flat partition of profile points into sorted cluster summaries.
// If two clusters would share a medoid pin, the later (less important) one
// falls back to its next-best member; a cluster with no unused member is
// dropped.
std::vector<ClusterSummary> summarize_clusters(const ward::ClusterSet& set,
                                               std::span<const ProfilePoint> points,
                                               const PinStore& store, double lambda,
                                               std::int64_t now);

// Full per-user inference: keep engagements from the trailing window ending
// at `now` (exclusive), drop records whose pin has no embedding, cluster,
// summarize.  An empty usable set yields an empty profile.  When the window
// holds more than point_cap usable engagements only the most recent cap is
// clustered.
UserProfile build_profile(const ActionLog& log, const PinStore& store,
                          const ProfileParams& params, std::int64_t now,
                          ProfileBuildStats* stats = nullptr);

} // namespace facet
