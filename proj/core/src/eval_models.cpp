#include "facet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <unordered_set>

#include "facet/dates.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/sampling.hpp"

namespace facet::eval {

std::string describe(const ModelSpec& spec) {
    char buf[96];
    switch (spec.kind) {
    case ModelKind::last_pin:
        return "last-pin";
    case ModelKind::decay_avg:
        std::snprintf(buf, sizeof buf, "decay-avg(%g)", spec.lambda);
        return buf;
    case ModelKind::oracle_best_pin:
        return "oracle-best-pin";
    case ModelKind::oracle_kmeans:
        std::snprintf(buf, sizeof buf, "oracle-kmeans(%zu)", spec.k);
        return buf;
    case ModelKind::kmeans_last_cluster:
        std::snprintf(buf, sizeof buf, "kmeans-last-cluster(%zu)", spec.k);
        return buf;
    case ModelKind::multi_interest: {
        const char* c = spec.clusterer == Clusterer::ward      ? "ward"
                        : spec.clusterer == Clusterer::kmeans ? "kmeans"
                                                              : "complete";
        const char* s = spec.summary == SummaryKind::medoid ? "medoid" : "centroid";
        if (spec.clusterer == Clusterer::kmeans) {
            std::snprintf(buf, sizeof buf, "%s-%s(k=%zu,e=%zu)", c, s, spec.k, spec.sample_e);
        } else {
            std::snprintf(buf, sizeof buf, "%s-%s(e=%zu)", c, s, spec.sample_e);
        }
        return buf;
    }
    }
    return "unknown";
}

namespace {

class LastPinModel final : public UserModel {
public:
    explicit LastPinModel(const PinStore& store) : store_(store) {}

    void observe(const ProfilePoint& point) override {
        last_ = point;
        seen_ = true;
    }

    double best_similarity(std::span<const float> target, std::int64_t, Rng&) override {
        return cosine_similarity(store_.embedding(last_.pin), target);
    }

    std::vector<std::vector<float>> embeddings(std::int64_t, Rng&) override {
        const auto row = store_.embedding(last_.pin);
        return {std::vector<float>(row.begin(), row.end())};
    }

    std::vector<retrieval::QuerySpec> queries(std::int64_t, Rng&) override {
        const auto row = store_.embedding(last_.pin);
        retrieval::QuerySpec q;
        q.embedding.assign(row.begin(), row.end());
        q.medoid = last_.pin; // a catalog pin, so the shared cache applies
        return {std::move(q)};
    }

    std::int64_t last_seen() const override {
        return seen_ ? last_.timestamp : std::numeric_limits<std::int64_t>::min();
    }
    bool ready() const override { return seen_; }

private:
    const PinStore& store_;
    ProfilePoint last_;
    bool seen_ = false;
};

class DecayAvgModel final : public UserModel {
public:
    DecayAvgModel(const PinStore& store, double lambda) : store_(store), lambda_(lambda) {}

    void observe(const ProfilePoint& point) override { points_.push_back(point); }

    double best_similarity(std::span<const float> target, std::int64_t now, Rng&) override {
        return cosine_similarity(decay_avg_embedding(points_, store_, lambda_, now), target);
    }

    std::vector<std::vector<float>> embeddings(std::int64_t now, Rng&) override {
        return {decay_avg_embedding(points_, store_, lambda_, now)};
    }

    std::vector<retrieval::QuerySpec> queries(std::int64_t now, Rng&) override {
        retrieval::QuerySpec q;
        q.embedding = decay_avg_embedding(points_, store_, lambda_, now);
        return {std::move(q)};
    }

    std::int64_t last_seen() const override {
        return points_.empty() ? std::numeric_limits<std::int64_t>::min()
                               : points_.back().timestamp;
    }
    bool ready() const override { return !points_.empty(); }

private:
    const PinStore& store_;
    double lambda_;
    std::vector<ProfilePoint> points_;
};

// Upper bound: free to answer with whichever stored pin sits closest to the
// target, which no servable model gets to do.
class OracleBestPinModel final : public UserModel {
public:
    explicit OracleBestPinModel(const PinStore& store) : store_(store) {}

    void observe(const ProfilePoint& point) override {
        last_ts_ = point.timestamp;
        if (seen_.insert(point.pin).second) pins_.push_back(point.pin);
    }

    double best_similarity(std::span<const float> target, std::int64_t, Rng&) override {
        double best = -1.0;
        for (const PinId pin : pins_) {
            best = std::max(best, cosine_similarity(store_.embedding(pin), target));
        }
        return best;
    }

    std::vector<std::vector<float>> embeddings(std::int64_t, Rng&) override {
        std::vector<std::vector<float>> out;
        out.reserve(pins_.size());
        for (const PinId pin : pins_) {
            const auto row = store_.embedding(pin);
            out.emplace_back(row.begin(), row.end());
        }
        return out;
    }

    std::vector<retrieval::QuerySpec> queries(std::int64_t, Rng&) override {
        throw ValidationError("oracle-best-pin has no retrieval form");
    }

    std::int64_t last_seen() const override { return last_ts_; }
    bool ready() const override { return !pins_.empty(); }

private:
    const PinStore& store_;
    std::vector<PinId> pins_;
    std::unordered_set<PinId> seen_;
    std::int64_t last_ts_ = std::numeric_limits<std::int64_t>::min();
};

// Shared plumbing for the two k-means models: refit on the observed prefix,
// then either maximize over the centroids (oracle) or commit to the last
// point's centroid.  Both consume the harness rng identically, so when the
// harness hands them equal-seeded forks they see the very same centroids and
// the oracle dominates the committed pick pointwise.
class KMeansPrefixModel : public UserModel {
public:
    KMeansPrefixModel(const PinStore& store, std::size_t k, bool oracle)
        : store_(store), k_(k), oracle_(oracle) {}

    void observe(const ProfilePoint& point) override { points_.push_back(point); }

    double best_similarity(std::span<const float> target, std::int64_t, Rng& rng) override {
        const PointSet ps = collect();
        const KMeansResult res = kmeans_cluster(ps, k_, rng);
        if (oracle_) {
            double best = -1.0;
            for (std::size_t c = 0; c < res.set.clusters.size(); ++c) {
                best = std::max(best, cosine_similarity(res.centroids.row(c), target));
            }
            return best;
        }
        const std::size_t last_cluster = res.set.assignment.at(points_.size() - 1);
        return cosine_similarity(res.centroids.row(last_cluster), target);
    }

    std::vector<std::vector<float>> embeddings(std::int64_t, Rng& rng) override {
        const PointSet ps = collect();
        const KMeansResult res = kmeans_cluster(ps, k_, rng);
        std::vector<std::vector<float>> out;
        for (std::size_t c = 0; c < res.set.clusters.size(); ++c) {
            const auto row = res.centroids.row(c);
            out.emplace_back(row.begin(), row.end());
        }
        return out;
    }

    std::vector<retrieval::QuerySpec> queries(std::int64_t, Rng&) override {
        throw ValidationError("k-means prefix models have no retrieval form");
    }

    std::int64_t last_seen() const override {
        return points_.empty() ? std::numeric_limits<std::int64_t>::min()
                               : points_.back().timestamp;
    }
    bool ready() const override { return !points_.empty(); }

private:
    PointSet collect() const {
        PointSet ps(store_.dimension());
        for (const ProfilePoint& p : points_) ps.add(store_.embedding(p.pin));
        return ps;
    }

    const PinStore& store_;
    std::size_t k_;
    bool oracle_;
    std::vector<ProfilePoint> points_;
};

class MultiInterestModel final : public UserModel {
public:
    MultiInterestModel(const PinStore& store, const ModelSpec& spec)
        : store_(store), spec_(spec) {}

    void observe(const ProfilePoint& point) override {
        points_.push_back(point);
        dirty_ = true;
    }

    double best_similarity(std::span<const float> target, std::int64_t now, Rng& rng) override {
        double best = -1.0;
        for (const auto& emb : embeddings(now, rng)) {
            best = std::max(best, cosine_similarity(emb, target));
        }
        return best;
    }

    std::vector<std::vector<float>> embeddings(std::int64_t now, Rng& rng) override {
        rebuild(now, rng);
        std::vector<std::vector<float>> out;
        for (const std::size_t ordinal : sample(rng)) {
            if (spec_.summary == SummaryKind::medoid) {
                const auto row = store_.embedding(summaries_[ordinal].medoid);
                out.emplace_back(row.begin(), row.end());
            } else {
                out.push_back(centroids_[ordinal]);
            }
        }
        return out;
    }

    std::vector<retrieval::QuerySpec> queries(std::int64_t now, Rng& rng) override {
        rebuild(now, rng);
        std::vector<retrieval::QuerySpec> out;
        for (const std::size_t ordinal : sample(rng)) {
            retrieval::QuerySpec q;
            if (spec_.summary == SummaryKind::medoid) {
                const auto row = store_.embedding(summaries_[ordinal].medoid);
                q.embedding.assign(row.begin(), row.end());
                q.medoid = summaries_[ordinal].medoid;
            } else {
                q.embedding = centroids_[ordinal];
            }
            out.push_back(std::move(q));
        }
        return out;
    }

    std::int64_t last_seen() const override {
        return points_.empty() ? std::numeric_limits<std::int64_t>::min()
                               : points_.back().timestamp;
    }
    bool ready() const override { return !points_.empty(); }

private:
    void rebuild(std::int64_t now, Rng& rng) {
        if (!dirty_ && now == built_now_) return;
        dirty_ = false;
        built_now_ = now;
        summaries_.clear();
        centroids_.clear();
        importances_.clear();

        const std::int64_t cutoff =
            now - static_cast<std::int64_t>(spec_.window_days) * kSecondsPerDay;
        std::vector<ProfilePoint> windowed;
        for (const ProfilePoint& p : points_) {
            if (p.timestamp >= cutoff && p.timestamp < now) windowed.push_back(p);
        }
        if (windowed.empty()) return;

        PointSet ps(store_.dimension());
        for (const ProfilePoint& p : windowed) ps.add(store_.embedding(p.pin));

        ward::ClusterSet set;
        switch (spec_.clusterer) {
        case Clusterer::ward:
            set = ward::cluster(ps, spec_.alpha).second;
            break;
        case Clusterer::kmeans:
            set = kmeans_cluster(ps, spec_.k, rng).set;
            break;
        case Clusterer::complete_linkage:
            set = complete_linkage_cluster(ps, spec_.alpha);
            break;
        }

        if (spec_.summary == SummaryKind::medoid) {
            summaries_ = summarize_clusters(set, windowed, store_, spec_.lambda, now);
            for (const ClusterSummary& s : summaries_) importances_.push_back(s.importance);
        } else {
            for (const auto& members : set.clusters) {
                std::vector<PinId> pins;
                std::vector<std::int64_t> stamps;
                for (const std::size_t i : members) {
                    pins.push_back(windowed[i].pin);
                    stamps.push_back(windowed[i].timestamp);
                }
                centroids_.push_back(compute_centroid(pins, store_));
                importances_.push_back(compute_importance(stamps, spec_.lambda, now));
            }
        }
    }

    // Ordinals of the summaries drawn for this request, importance-weighted.
    std::vector<std::size_t> sample(Rng& rng) const {
        if (importances_.empty()) return {};
        std::vector<std::pair<std::uint64_t, double>> items;
        for (std::size_t i = 0; i < importances_.size(); ++i) {
            items.emplace_back(static_cast<std::uint64_t>(i), importances_[i]);
        }
        const auto drawn = weighted_sample_without_replacement(items, spec_.sample_e, rng);
        return {drawn.begin(), drawn.end()};
    }

    const PinStore& store_;
    ModelSpec spec_;
    std::vector<ProfilePoint> points_;
    bool dirty_ = true;
    std::int64_t built_now_ = std::numeric_limits<std::int64_t>::min();
    std::vector<ClusterSummary> summaries_;          // medoid form
    std::vector<std::vector<float>> centroids_;      // centroid form
    std::vector<double> importances_;                // aligned with either form
};

} // namespace

std::unique_ptr<UserModel> make_model(const ModelSpec& spec, const PinStore& store) {
    switch (spec.kind) {
    case ModelKind::last_pin:
        return std::make_unique<LastPinModel>(store);
    case ModelKind::decay_avg:
        return std::make_unique<DecayAvgModel>(store, spec.lambda);
    case ModelKind::oracle_best_pin:
        return std::make_unique<OracleBestPinModel>(store);
    case ModelKind::oracle_kmeans:
        return std::make_unique<KMeansPrefixModel>(store, spec.k, true);
    case ModelKind::kmeans_last_cluster:
        return std::make_unique<KMeansPrefixModel>(store, spec.k, false);
    case ModelKind::multi_interest:
        return std::make_unique<MultiInterestModel>(store, spec);
    }
    throw ValidationError("unknown model kind");
}

} // namespace facet::eval
