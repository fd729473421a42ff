#include <limits>
#include <string>
#include <vector>

#include "facet/errors.hpp"
#include "facet/ward.hpp"

namespace facet::ward {

// Validation-only path.  Merge costs come straight from the definition: the
// cost of joining A and B is the growth in within-cluster variance, which for
// the squared-distance convention used here equals
//
//     2 * |A| * |B| / (|A| + |B|) * ||centroid(A) - centroid(B)||^2.
//
// No pairwise recurrence is involved, so this checks the chain implementation
// through an entirely different arithmetic route.
MergeHistory naive_reference(const PointSet& points) {
    const std::size_t m = points.size();
    if (m > 256)
        throw ValidationError("reference clustering is O(m^3); got m = " + std::to_string(m));

    MergeHistory history;
    history.initial_count = static_cast<std::uint32_t>(m);
    if (m < 2) return history;
    history.events.reserve(m - 1);

    const std::size_t d = points.dimension;
    std::vector<char> alive(m, 1);
    std::vector<double> size(m, 1.0);
    std::vector<double> centroid(m * d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < d; ++c)
            centroid[i * d + c] = static_cast<double>(points.row(i)[c]);

    const auto cost = [&](std::uint32_t a, std::uint32_t b) {
        double gap = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = centroid[a * d + c] - centroid[b * d + c];
            gap += diff * diff;
        }
        return 2.0 * size[a] * size[b] / (size[a] + size[b]) * gap;
    };

    for (std::size_t step = 0; step + 1 < m; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t bi = 0, bj = 0; // bi < bj
        for (std::uint32_t i = 0; i < m; ++i) {
            if (!alive[i]) continue;
            for (std::uint32_t j = i + 1; j < m; ++j) {
                if (!alive[j]) continue;
                const double c = cost(i, j);
                if (c < best) {
                    best = c;
                    bi = i;
                    bj = j;
                }
            }
        }

        // The higher index absorbs, mirroring nothing in particular: only the
        // member sets and costs matter to callers.
        const std::uint32_t absorber = bj;
        const std::uint32_t absorbed = bi;
        const double total = size[bi] + size[bj];
        for (std::size_t c = 0; c < d; ++c)
            centroid[absorber * d + c] =
                (size[absorber] * centroid[absorber * d + c] +
                 size[absorbed] * centroid[absorbed * d + c]) /
                total;
        size[absorber] = total;
        alive[absorbed] = 0;
        history.events.push_back(
            {absorber, absorbed, best, static_cast<std::uint32_t>(total)});
    }
    return history;
}

} // namespace facet::ward
