#include "facet/profile.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "facet/dates.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"

namespace facet {

PinId compute_medoid(std::span<const PinId> members, const PinStore& store) {
    if (members.empty()) throw ValidationError("medoid of an empty cluster is undefined");
    PinId best_pin = 0;
    double best_cost = 0.0;
    bool first = true;
    for (const PinId candidate : members) {
        const auto cand_emb = store.embedding(candidate);
        double cost = 0.0;
        for (const PinId other : members)
            cost += squared_euclidean(cand_emb, store.embedding(other));
        if (first || cost < best_cost || (cost == best_cost && candidate < best_pin)) {
            best_cost = cost;
            best_pin = candidate;
            first = false;
        }
    }
    return best_pin;
}

std::vector<float> compute_centroid(std::span<const PinId> members, const PinStore& store) {
    if (members.empty()) throw ValidationError("centroid of an empty cluster is undefined");
    std::vector<double> acc(store.dimension(), 0.0);
    for (const PinId pin : members) {
        const auto emb = store.embedding(pin);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += static_cast<double>(emb[c]);
    }
    std::vector<float> out(acc.size());
    for (std::size_t c = 0; c < acc.size(); ++c)
        out[c] = static_cast<float>(acc[c] / static_cast<double>(members.size()));
    return out;
}

double compute_importance(std::span<const std::int64_t> timestamps, double lambda_per_day,
                          std::int64_t now) {
    if (lambda_per_day < 0.0) throw ValidationError("decay rate must be non-negative");
    double sum = 0.0;
    for (const std::int64_t ts : timestamps) {
        if (ts > now) throw ValidationError("engagement timestamp lies in the future");
        const double age_days =
            static_cast<double>(now - ts) / static_cast<double>(kSecondsPerDay);
        sum += std::exp(-lambda_per_day * age_days);
    }
    return sum;
}

std::vector<ClusterSummary> summarize_clusters(const ward::ClusterSet& set,
                                               std::span<const ProfilePoint> points,
                                               const PinStore& store, double lambda,
                                               std::int64_t now) {
    struct Draft {
        std::vector<PinId> pins;
        double importance = 0.0;
    };
    std::vector<Draft> drafts;
    drafts.reserve(set.clusters.size());
    for (const auto& cluster : set.clusters) {
        Draft d;
        d.pins.reserve(cluster.size());
        std::vector<std::int64_t> ts;
        ts.reserve(cluster.size());
        for (const std::uint32_t idx : cluster) {
            d.pins.push_back(points[idx].pin);
            ts.push_back(points[idx].timestamp);
        }
        d.importance = compute_importance(ts, lambda, now);
        drafts.push_back(std::move(d));
    }

    // Most important first, so the medoid-uniqueness fallback below demotes
    // the less important of two colliding clusters.
    std::vector<std::size_t> order(drafts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (drafts[a].importance != drafts[b].importance)
            return drafts[a].importance > drafts[b].importance;
        return drafts[a].pins.front() < drafts[b].pins.front();
    });

    std::vector<ClusterSummary> summaries;
    std::unordered_set<PinId> used;
    summaries.reserve(drafts.size());
    for (const std::size_t i : order) {
        const Draft& d = drafts[i];
        // Rank members by medoid cost and take the best whose pin is unused.
        std::vector<PinId> unique(d.pins.begin(), d.pins.end());
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        std::vector<std::pair<double, PinId>> ranked;
        ranked.reserve(unique.size());
        for (const PinId candidate : unique) {
            const auto cand_emb = store.embedding(candidate);
            double cost = 0.0;
            for (const PinId other : d.pins)
                cost += squared_euclidean(cand_emb, store.embedding(other));
            ranked.emplace_back(cost, candidate);
        }
        std::sort(ranked.begin(), ranked.end());
        PinId medoid = 0;
        bool found = false;
        for (const auto& [cost, candidate] : ranked) {
            if (used.count(candidate)) continue;
            medoid = candidate;
            found = true;
            break;
        }
        if (!found) continue; // every member pin already fronts another cluster
        used.insert(medoid);
        summaries.push_back({medoid, d.importance, static_cast<std::uint32_t>(d.pins.size())});
    }

    std::sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.medoid < b.medoid;
    });
    return summaries;
}

UserProfile build_profile(const ActionLog& log, const PinStore& store,
                          const ProfileParams& params, std::int64_t now,
                          ProfileBuildStats* stats) {
    if (params.alpha < 0.0) throw ValidationError("alpha must be non-negative");
    if (params.lambda < 0.0) throw ValidationError("lambda must be non-negative");

    const std::int64_t window_start =
        now - static_cast<std::int64_t>(params.window_days) * kSecondsPerDay;

    ProfileBuildStats local;
    ProfileBuildStats& st = stats ? *stats : local;

    std::vector<ProfilePoint> kept;
    for (const ActionRecord& r : log.records) {
        if (!is_engagement(r.kind)) continue;
        if (r.timestamp < window_start || r.timestamp >= now) continue;
        if (!store.contains(r.pin)) {
            ++st.skipped_missing_embedding;
            continue;
        }
        kept.push_back({r.pin, r.timestamp});
    }
    if (kept.size() > params.point_cap) {
        // Records are time-sorted, so the tail is the most recent.
        st.dropped_over_cap = kept.size() - params.point_cap;
        kept.erase(kept.begin(), kept.end() - static_cast<std::ptrdiff_t>(params.point_cap));
    }
    st.usable_points = kept.size();

    UserProfile profile;
    profile.user = log.user;
    profile.version.date = day_of_timestamp(now - 1);
    profile.version.source = ProfileSource::batch;
    if (kept.empty()) return profile;

    PointSet points(store.dimension());
    points.values.reserve(kept.size() * store.dimension());
    for (const ProfilePoint& p : kept) points.add(store.embedding(p.pin));

    const auto [history, set] = ward::cluster(points, params.alpha, nullptr, params.point_cap);
    profile.summaries = summarize_clusters(set, kept, store, params.lambda, now);
    return profile;
}

} // namespace facet
