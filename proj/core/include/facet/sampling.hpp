#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "facet/rng.hpp"

namespace facet {

// Draws up to k distinct ids, each round selecting proportionally to the
// remaining weights.  Zero-weight items are never selected; if fewer than k
// items have positive weight, all of them are returned.  Weights must be
// finite and non-negative, and at least one must be positive.
std::vector<std::uint64_t> weighted_sample_without_replacement(
    std::span<const std::pair<std::uint64_t, double>> items, std::size_t k, Rng& rng);

} // namespace facet
