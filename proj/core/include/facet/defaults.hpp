#pragma once

#include <cstddef>
#include <cstdint>

namespace facet::defaults {

// Clustering and profile building.
inline constexpr double kAlpha = 1.0;          // merge-cost cut for unit-norm embeddings
inline constexpr double kLambda = 0.01;        // importance decay per day
inline constexpr std::size_t kWindowDays = 90; // trailing activity window for batch runs
inline constexpr std::size_t kPointCap = 5000; // max points per clustering run

// Online serving.
inline constexpr std::size_t kOnlineBuffer = 20; // most recent same-day engagements kept

// Retrieval.
inline constexpr std::size_t kSampleE = 3;   // interest summaries sampled per request
inline constexpr std::size_t kBudget = 400;  // total candidates per request

// Nearest-neighbor index.
inline constexpr std::uint32_t kMaxNeighbors = 16; // graph degree target
inline constexpr std::uint32_t kBuildBeam = 200;
inline constexpr std::uint32_t kQueryBeam = 100;
inline constexpr double kDedupThreshold = 0.99; // cosine similarity treated as duplicate
inline constexpr double kQualityFloor = 0.0;

inline constexpr std::uint64_t kSeed = 42;

} // namespace facet::defaults
