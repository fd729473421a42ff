#include "facet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "facet/dates.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"

namespace facet::eval {

namespace {

// Seeded Forgy init: k distinct rows, resampling collisions by value so
// duplicated points cannot produce coincident centroids.
std::vector<std::size_t> pick_initial_rows(const PointSet& points, std::size_t k, Rng& rng) {
    const std::size_t m = points.size();
    std::vector<std::size_t> rows;
    rows.reserve(k);
    std::size_t attempts = 0;
    while (rows.size() < k) {
        if (++attempts > 1000 * k) {
            throw ValidationError("kmeans: could not find k distinct initial points");
        }
        const std::size_t candidate = static_cast<std::size_t>(rng.next_below(m));
        bool duplicate = false;
        for (const std::size_t chosen : rows) {
            const auto a = points.row(chosen);
            const auto b = points.row(candidate);
            if (std::equal(a.begin(), a.end(), b.begin())) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) rows.push_back(candidate);
    }
    return rows;
}

std::size_t distinct_row_count(const PointSet& points) {
    std::vector<std::span<const float>> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) rows.push_back(points.row(i));
    std::sort(rows.begin(), rows.end(), [](auto a, auto b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0 || !std::equal(rows[i].begin(), rows[i].end(), rows[i - 1].begin())) {
            ++distinct;
        }
    }
    return distinct;
}

} // namespace

KMeansResult kmeans_cluster(const PointSet& points, std::size_t k, Rng& rng,
                            std::size_t max_iters, double tolerance) {
    if (points.size() == 0) throw ValidationError("kmeans: empty point set");
    if (k == 0) throw ValidationError("kmeans: k must be positive");
    const std::size_t d = points.dimension;
    k = std::min({k, points.size(), distinct_row_count(points)});

    std::vector<double> centroids(k * d);
    const std::vector<std::size_t> seeds_rows = pick_initial_rows(points, k, rng);
    for (std::size_t c = 0; c < k; ++c) {
        const auto row = points.row(seeds_rows[c]);
        for (std::size_t j = 0; j < d; ++j) centroids[c * d + j] = row[j];
    }

    std::vector<std::size_t> assignment(points.size(), 0);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool any_change = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto row = points.row(i);
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double dist = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = static_cast<double>(row[j]) - centroids[c * d + j];
                    dist += diff * diff;
                }
                if (dist < best) {
                    best = dist;
                    best_c = c;
                }
            }
            if (assignment[i] != best_c) {
                assignment[i] = best_c;
                any_change = true;
            }
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0u);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto row = points.row(i);
            const std::size_t c = assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += row[j];
        }

        double max_move_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue; // emptied cluster keeps its centroid
            double move_sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double next = sums[c * d + j] / static_cast<double>(counts[c]);
                const double diff = next - centroids[c * d + j];
                move_sq += diff * diff;
                centroids[c * d + j] = next;
            }
            max_move_sq = std::max(max_move_sq, move_sq);
        }

        if (!any_change && iter > 0) break;
        if (max_move_sq <= tolerance * tolerance) break;
    }

    KMeansResult result;
    result.centroids.dimension = d;
    result.set.assignment.assign(points.size(), 0);
    std::vector<std::uint32_t> remap(k, 0);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::uint32_t> members;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (assignment[i] == c) members.push_back(static_cast<std::uint32_t>(i));
        }
        if (members.empty()) continue;
        remap[c] = static_cast<std::uint32_t>(result.set.clusters.size());
        result.set.clusters.push_back(std::move(members));
        for (std::size_t j = 0; j < d; ++j) {
            result.centroids.values.push_back(static_cast<float>(centroids[c * d + j]));
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        result.set.assignment[i] = remap[assignment[i]];
    }
    return result;
}

ward::ClusterSet complete_linkage_cluster(const PointSet& points, double alpha) {
    const std::size_t m = points.size();
    if (m == 0) throw ValidationError("complete linkage: empty point set");
    if (!(alpha >= 0.0)) throw ValidationError("complete linkage: alpha must be non-negative");

    std::vector<std::vector<std::uint32_t>> clusters;
    clusters.reserve(m);
    for (std::size_t i = 0; i < m; ++i) clusters.push_back({static_cast<std::uint32_t>(i)});

    // Pairwise point distances once; linkage scans take the max over members.
    std::vector<double> point_dist(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double dist = squared_euclidean(points.row(a), points.row(b));
            point_dist[a * m + b] = dist;
            point_dist[b * m + a] = dist;
        }
    }
    const auto linkage = [&](const std::vector<std::uint32_t>& ca,
                             const std::vector<std::uint32_t>& cb) {
        double worst = 0.0;
        for (const std::uint32_t a : ca) {
            for (const std::uint32_t b : cb) {
                worst = std::max(worst, point_dist[a * m + b]);
            }
        }
        return worst;
    };

    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        std::size_t bj = 0;
        for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double cost = linkage(clusters[i], clusters[j]);
                if (cost < best) {
                    best = cost;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best > alpha) break;
        auto merged = clusters[bi];
        merged.insert(merged.end(), clusters[bj].begin(), clusters[bj].end());
        std::sort(merged.begin(), merged.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        clusters[bi] = std::move(merged);
    }

    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    ward::ClusterSet out;
    out.assignment.assign(m, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const std::uint32_t i : clusters[c]) {
            out.assignment[i] = static_cast<std::uint32_t>(c);
        }
    }
    out.clusters = std::move(clusters);
    return out;
}

std::vector<float> decay_avg_embedding(std::span<const ProfilePoint> points,
                                       const PinStore& store, double lambda,
                                       std::int64_t now) {
    if (points.empty()) throw ValidationError("decay average: no points");
    const std::size_t d = store.dimension();
    std::vector<double> acc(d, 0.0);
    for (const ProfilePoint& p : points) {
        const double age_days =
            static_cast<double>(now - p.timestamp) / static_cast<double>(kSecondsPerDay);
        const double w = std::exp(-lambda * age_days);
        const auto row = store.embedding(p.pin);
        for (std::size_t j = 0; j < d; ++j) acc[j] += w * row[j];
    }
    double norm_sq = 0.0;
    for (const double v : acc) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0)) throw ValidationError("decay average: zero-norm result");
    std::vector<float> out(d);
    for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<float>(acc[j] / norm);
    return out;
}

} // namespace facet::eval
