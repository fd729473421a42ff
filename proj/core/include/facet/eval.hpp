#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "facet/medoid_cache.hpp"
#include "facet/profile.hpp"
#include "facet/retrieval.hpp"
#include "facet/rng.hpp"
#include "facet/types.hpp"
#include "facet/ward.hpp"

namespace facet::eval {

// ---- clustering baselines ----------------------------------------------

struct KMeansResult {
    ward::ClusterSet set;   // non-empty clusters only
    PointSet centroids;     // one row per cluster, same order
};

// Lloyd iterations with seeded initialization from k distinct points.
// Assignment ties go to the lower cluster ordinal; an emptied cluster keeps
// its previous centroid.  Stops after max_iters or when no centroid moved
// more than `tolerance` (Euclidean).  k > m degrades to k = m.
KMeansResult kmeans_cluster(const PointSet& points, std::size_t k, Rng& rng,
                            std::size_t max_iters = 100, double tolerance = 1e-6);

// Agglomerates while the smallest complete-linkage cost (the max pairwise
// squared Euclidean distance across the pair of clusters) stays within
// alpha.  O(m^3); test- and baseline-scale only.
ward::ClusterSet complete_linkage_cluster(const PointSet& points, double alpha);

// Engagements folded into one embedding, each weighted exp(-lambda * age in
// days) relative to `now`; L2-normalized.  Points must be non-empty.
std::vector<float> decay_avg_embedding(std::span<const ProfilePoint> points,
                                       const PinStore& store, double lambda,
                                       std::int64_t now);

// ---- user models ---------------------------------------------------------

enum class ModelKind {
    last_pin,            // the most recent engagement stands in for the user
    decay_avg,           // single time-decayed average embedding
    oracle_best_pin,     // upper bound: may pick its best stored pin per target
    oracle_kmeans,       // may pick its best k-means centroid per target
    kmeans_last_cluster, // non-oracular bound mate: centroid of the last pin's cluster
    multi_interest,      // clustered profile with sampled queries
};

enum class Clusterer { ward, kmeans, complete_linkage };
enum class SummaryKind { medoid, centroid };

struct ModelSpec {
    ModelKind kind = ModelKind::last_pin;
    std::string name;       // report label; filled by describe() when empty
    double lambda = defaults::kLambda;
    double alpha = defaults::kAlpha;
    std::size_t k = 3;      // k-means cluster count (oracle and multi variants)
    std::size_t sample_e = defaults::kSampleE; // queries sampled (multi variants)
    Clusterer clusterer = Clusterer::ward;     // multi variants
    SummaryKind summary = SummaryKind::medoid; // multi variants
    std::size_t window_days = defaults::kWindowDays;
};

std::string describe(const ModelSpec& spec);

// Per-user incremental model.  The harness feeds engagements strictly older
// than whatever is being evaluated; `last_seen` lets it verify that.
class UserModel {
public:
    virtual ~UserModel() = default;
    virtual void observe(const ProfilePoint& point) = 0;
    // Best cosine similarity any of the model's representatives reaches for
    // the target.  Oracle models maximize over their stored candidates here.
    virtual double best_similarity(std::span<const float> target, std::int64_t now,
                                   Rng& rng) = 0;
    // Representative user embeddings for ranking (importance-sampled for
    // multi-interest models).
    virtual std::vector<std::vector<float>> embeddings(std::int64_t now, Rng& rng) = 0;
    // Retrieval queries; medoid ids are set when the embedding is a catalog
    // pin so the shared cache applies.
    virtual std::vector<retrieval::QuerySpec> queries(std::int64_t now, Rng& rng) = 0;
    virtual std::int64_t last_seen() const = 0;
    virtual bool ready() const = 0; // has enough state to answer
};

std::unique_ptr<UserModel> make_model(const ModelSpec& spec, const PinStore& store);

// ---- tasks ----------------------------------------------------------------

struct NextActionRow {
    std::string model;
    std::size_t events = 0;
    std::size_t successes = 0;
    double accuracy = 0.0;
};

// For every user with at least two usable engagements, predict each
// engagement from the strictly earlier prefix; success is best similarity at
// or above the threshold.  Event counts are identical across models.
std::vector<NextActionRow> next_action_task(std::span<const ModelSpec> specs,
                                            const std::vector<ActionLog>& logs,
                                            const PinStore& store, double threshold,
                                            std::uint64_t seed, std::size_t threads = 1);

struct EvalDataset {
    const std::vector<ActionLog>* logs = nullptr; // engagements and impressions
    const PinStore* store = nullptr;
    const ann::GraphIndex* index = nullptr;
    std::int64_t split_day = 0;   // first evaluated civil day
    double threshold = 0.8;       // cosine relevance bar
    std::uint64_t seed = defaults::kSeed;
    std::size_t threads = 1;
    const std::set<UserId>* user_filter = nullptr; // optional allow-list
};

struct RetrievalRow {
    std::string model;
    std::size_t groups = 0;      // evaluated (user, day) pairs
    std::size_t test_points = 0; // engagements scored
    double relevance = 0.0;      // share of test engagements near any candidate
    double recall = 0.0;         // share of test engagement pins literally retrieved
    double diversity = 0.0;      // mean pairwise cosine distance of candidate sets
};

// Chronological day batches from split_day on: evaluate each user's candidate
// set against the day's engagements, then let the models observe that day.
std::vector<RetrievalRow> retrieval_task(std::span<const ModelSpec> specs,
                                         const EvalDataset& data,
                                         const retrieval::RetrievalConfig& config);

struct RankingRow {
    std::string model;
    std::size_t groups = 0;
    double r_precision = 0.0;
    double reciprocal_rank = 0.0;
};

// Per (user, day): rank the day's engagement pins against impressions sampled
// 20 per engagement (padded from pins observed anywhere in the logs when the
// day is short on impressions) by best similarity to any model embedding.
std::vector<RankingRow> ranking_task(std::span<const ModelSpec> specs,
                                     const EvalDataset& data);

struct SweepRow {
    std::size_t e = 0;
    double relevance = 0.0;
    double recall = 0.0;
    double diversity = 0.0;
};

// Retrieval metrics of the multi-interest model as the per-request sample
// count e varies.
std::vector<SweepRow> diversity_relevance_sweep(const ModelSpec& base,
                                                const EvalDataset& data,
                                                const retrieval::RetrievalConfig& config,
                                                std::span<const std::size_t> e_values);

// ---- reports ----------------------------------------------------------------

// Percentage lift of a metric over the named baseline row; empty when the
// baseline value is zero.
std::optional<double> lift_percent(double value, double baseline);

std::string next_action_markdown(std::span<const NextActionRow> rows,
                                 const std::string& baseline);
std::string next_action_csv(std::span<const NextActionRow> rows);
std::string retrieval_markdown(std::span<const RetrievalRow> rows, const std::string& baseline);
std::string retrieval_csv(std::span<const RetrievalRow> rows);
std::string ranking_markdown(std::span<const RankingRow> rows, const std::string& baseline);
std::string ranking_csv(std::span<const RankingRow> rows);
std::string sweep_markdown(std::span<const SweepRow> rows);
std::string sweep_csv(std::span<const SweepRow> rows);

} // namespace facet::eval
