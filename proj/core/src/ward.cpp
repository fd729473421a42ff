#include "facet/ward.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <string>

#include "facet/distance.hpp"
#include "facet/errors.hpp"

namespace facet::ward {

double lance_williams_update(double d_ik, double d_jk, double d_ij,
                             std::size_t n_i, std::size_t n_j, std::size_t n_k) {
    const double ni = static_cast<double>(n_i);
    const double nj = static_cast<double>(n_j);
    const double nk = static_cast<double>(n_k);
    return ((ni + nk) * d_ik + (nj + nk) * d_jk - nk * d_ij) / (ni + nj + nk);
}

namespace {

// Pairwise cost table over the initial point indices, condensed lower
// triangle.  Entries for dead clusters are stale and never read.
class CostTable {
public:
    explicit CostTable(std::size_t m) : m_(m), cells_(m * (m - 1) / 2) {}

    double get(std::uint32_t a, std::uint32_t b) const { return cells_[at(a, b)]; }
    void set(std::uint32_t a, std::uint32_t b, double v) { cells_[at(a, b)] = v; }

private:
    std::size_t at(std::uint32_t a, std::uint32_t b) const {
        if (a > b) std::swap(a, b);
        return static_cast<std::size_t>(a) * (2 * m_ - a - 1) / 2 + (b - a - 1);
    }
    std::size_t m_;
    std::vector<double> cells_;
};

constexpr double kReducibilitySlack = 1e-9;

} // namespace

MergeHistory build_dendrogram(const PointSet& points, ChainStats* stats,
                              std::size_t point_cap) {
    const std::size_t m = points.size();
    if (m > point_cap)
        throw ValidationError("clustering input has " + std::to_string(m) +
                              " points, cap is " + std::to_string(point_cap));

    MergeHistory history;
    history.initial_count = static_cast<std::uint32_t>(m);
    if (m < 2) return history;
    history.events.reserve(m - 1);

    ChainStats local;
    ChainStats& st = stats ? *stats : local;

    CostTable cost(m);
    for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t j = i + 1; j < m; ++j)
            cost.set(i, j, squared_euclidean(points.row(i), points.row(j)));

    std::vector<char> alive(m, 1);
    std::vector<std::uint32_t> size(m, 1);
    std::size_t alive_count = m;
    std::uint32_t first_alive = 0;

    std::vector<std::uint32_t> stack;
    stack.reserve(m);
    std::vector<char> on_stack(m, 0);

    const auto push = [&](std::uint32_t id) {
        if (on_stack[id]) {
            ++st.double_push_violations;
            assert(!"cluster pushed while already on the chain stack");
        }
        stack.push_back(id);
        on_stack[id] = 1;
        ++st.pushes;
        st.max_stack_depth = std::max<std::uint64_t>(st.max_stack_depth, stack.size());
    };

    while (alive_count > 1) {
        while (!alive[first_alive]) ++first_alive;
        push(first_alive);

        while (!stack.empty()) {
            const std::uint32_t i = stack.back();

            // Nearest live neighbor of i; scanning ascending ids with a
            // strict < keeps the lowest id among equals.
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t nearest = i;
            for (std::uint32_t k = 0; k < m; ++k) {
                if (!alive[k] || k == i) continue;
                const double d = cost.get(i, k);
                if (d < best) {
                    best = d;
                    nearest = k;
                }
            }

            bool merged = false;
            if (stack.size() >= 2) {
                const std::uint32_t j = stack[stack.size() - 2];
                if (cost.get(i, j) == best) {
                    // i and j are mutual nearest neighbors: i absorbs j.
                    stack.pop_back();
                    stack.pop_back();
                    on_stack[i] = 0;
                    on_stack[j] = 0;

                    history.events.push_back({i, j, best, size[i] + size[j]});

                    for (std::uint32_t k = 0; k < m; ++k) {
                        if (!alive[k] || k == i || k == j) continue;
                        const double d_ik = cost.get(i, k);
                        const double d_jk = cost.get(j, k);
                        const double updated =
                            lance_williams_update(d_ik, d_jk, best, size[i], size[j], size[k]);
                        if (updated < std::min(d_ik, d_jk) - kReducibilitySlack) {
                            ++st.lemma_violations;
                            assert(!"merge-cost update broke reducibility");
                        }
                        cost.set(i, k, updated);
                    }

                    size[i] += size[j];
                    alive[j] = 0;
                    --alive_count;
                    ++st.merges;
                    merged = true;
                }
            }
            if (!merged) push(nearest);
        }
    }

    assert(history.events.size() == m - 1);
    return history;
}

ClusterSet extract_clusters(const MergeHistory& history, double alpha) {
    if (alpha < 0.0) throw ValidationError("alpha must be non-negative");
    const std::size_t m = history.initial_count;
    if (history.events.size() + 1 != m && !(m == 0 && history.events.empty()))
        throw ValidationError("merge history is incomplete: " +
                              std::to_string(history.events.size()) + " events for " +
                              std::to_string(m) + " points");

    ClusterSet out;
    if (m == 0) return out;

    // Replay the agglomeration to recover each event's member set.
    std::vector<std::vector<std::uint32_t>> members(m);
    for (std::uint32_t i = 0; i < m; ++i) members[i] = {i};
    std::vector<std::vector<std::uint32_t>> event_members(history.events.size());
    std::vector<char> absorbed_seen(m, 0);
    for (std::size_t e = 0; e < history.events.size(); ++e) {
        const MergeEvent& ev = history.events[e];
        if (ev.absorber >= m || ev.absorbed >= m || absorbed_seen[ev.absorbed])
            throw ValidationError("merge history is malformed at event " + std::to_string(e));
        absorbed_seen[ev.absorbed] = 1;
        auto& dst = members[ev.absorber];
        auto& src = members[ev.absorbed];
        std::vector<std::uint32_t> merged;
        merged.reserve(dst.size() + src.size());
        std::merge(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(merged));
        dst = std::move(merged);
        src.clear();
        event_members[e] = members[ev.absorber];
    }

    std::vector<std::size_t> order(history.events.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const MergeEvent& ea = history.events[a];
        const MergeEvent& eb = history.events[b];
        if (ea.distance != eb.distance) return ea.distance > eb.distance;
        if (ea.absorber != eb.absorber) return ea.absorber < eb.absorber;
        return ea.absorbed < eb.absorbed;
    });

    std::vector<char> covered(m, 0);
    for (const std::size_t e : order) {
        if (history.events[e].distance > alpha) continue;
        const auto& mem = event_members[e];
        bool disjoint = true;
        for (const std::uint32_t p : mem)
            if (covered[p]) {
                disjoint = false;
                break;
            }
        if (!disjoint) continue;
        for (const std::uint32_t p : mem) covered[p] = 1;
        out.clusters.push_back(mem);
    }
    for (std::uint32_t p = 0; p < m; ++p)
        if (!covered[p]) out.clusters.push_back({p});

    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    out.assignment.assign(m, 0);
    for (std::uint32_t c = 0; c < out.clusters.size(); ++c)
        for (const std::uint32_t p : out.clusters[c]) out.assignment[p] = c;
    return out;
}

std::pair<MergeHistory, ClusterSet> cluster(const PointSet& points, double alpha,
                                            ChainStats* stats, std::size_t point_cap) {
    MergeHistory history = build_dendrogram(points, stats, point_cap);
    ClusterSet set = extract_clusters(history, alpha);
    return {std::move(history), std::move(set)};
}

} // namespace facet::ward
