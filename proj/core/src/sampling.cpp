#include "facet/sampling.hpp"

#include <cmath>

#include "facet/errors.hpp"

namespace facet {

std::vector<std::uint64_t> weighted_sample_without_replacement(
    std::span<const std::pair<std::uint64_t, double>> items, std::size_t k, Rng& rng) {
    if (k == 0) throw ValidationError("sample size must be at least 1");

    std::vector<double> weight(items.size());
    std::size_t positive = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double w = items[i].second;
        if (!std::isfinite(w) || w < 0.0)
            throw ValidationError("sampling weights must be finite and non-negative");
        weight[i] = w;
        if (w > 0.0) ++positive;
    }
    if (positive == 0) throw ValidationError("all sampling weights are zero");

    const std::size_t draws = std::min(k, positive);
    std::vector<std::uint64_t> picked;
    picked.reserve(draws);
    for (std::size_t round = 0; round < draws; ++round) {
        double total = 0.0;
        for (const double w : weight) total += w;
        const double r = rng.next_double() * total;
        double cum = 0.0;
        std::size_t chosen = items.size();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (weight[i] <= 0.0) continue;
            cum += weight[i];
            chosen = i;
            if (r < cum) break;
        }
        // chosen falls through to the last positive item when r lands on the
        // rounding edge r == total.
        picked.push_back(items[chosen].first);
        weight[chosen] = 0.0;
    }
    return picked;
}

} // namespace facet
