#include "facet/ann.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <string>

#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/io.hpp"

namespace facet::ann {

std::vector<PinId> refine_pool(const PinStore& store, const RefineConfig& config,
                               RefineStats* stats) {
    if (!(config.dedup_threshold > 0.0 && config.dedup_threshold <= 1.0))
        throw ValidationError("dedup threshold must lie in (0, 1]");
    if (config.quality_floor < 0.0 || config.quality_floor > 1.0)
        throw ValidationError("quality floor must lie in [0, 1]");

    RefineStats local;
    RefineStats& st = stats ? *stats : local;

    std::vector<PinId> ids = store.ids();
    std::sort(ids.begin(), ids.end());

    const std::size_t d = store.dimension();
    std::vector<PinId> accepted;
    std::vector<float> accepted_vectors; // normalized, contiguous
    accepted.reserve(ids.size());

    std::vector<float> candidate(d);
    for (const PinId id : ids) {
        if (store.quality(id) < config.quality_floor) {
            ++st.dropped_quality;
            continue;
        }
        const auto emb = store.embedding(id);
        const double norm = l2_norm(emb);
        if (norm == 0.0)
            throw ValidationError("pin " + std::to_string(id) +
                                  " has a zero embedding; cosine comparisons are undefined");
        for (std::size_t c = 0; c < d; ++c)
            candidate[c] = static_cast<float>(static_cast<double>(emb[c]) / norm);

        bool duplicate = false;
        for (std::size_t a = 0; a < accepted.size() && !duplicate; ++a) {
            const float* other = accepted_vectors.data() + a * d;
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                dot += static_cast<double>(candidate[c]) * static_cast<double>(other[c]);
            duplicate = dot >= config.dedup_threshold;
        }
        if (duplicate) {
            ++st.dropped_duplicate;
            continue;
        }
        accepted.push_back(id);
        accepted_vectors.insert(accepted_vectors.end(), candidate.begin(), candidate.end());
    }
    return accepted;
}

std::vector<Neighbor> exact_knn(const PinStore& store, std::span<const PinId> pool,
                                std::span<const float> query, std::size_t k) {
    std::vector<Neighbor> all;
    all.reserve(pool.size());
    for (const PinId id : pool)
        all.push_back({id, cosine_distance(query, store.embedding(id))});
    const std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + take, all.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          if (a.distance != b.distance) return a.distance < b.distance;
                          return a.pin < b.pin;
                      });
    all.resize(take);
    return all;
}

namespace {

constexpr char kIndexMagic[4] = {'F', 'X', 'I', '1'};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::uint32_t kMaxLevelCap = 30;

// Epoch-stamped visited set: O(1) clear between searches.
struct Visited {
    std::vector<std::uint32_t> mark;
    std::uint32_t epoch = 0;

    void reset(std::size_t n) {
        if (mark.size() != n || ++epoch == 0) {
            mark.assign(n, 0);
            epoch = 1;
        }
    }
    bool first_visit(std::uint32_t id) {
        if (mark[id] == epoch) return false;
        mark[id] = epoch;
        return true;
    }
};

using ScoredNode = std::pair<double, std::uint32_t>; // (distance, node); total order

template <typename T>
void put_raw_le(std::ostream& out, T value) {
    unsigned char buf[sizeof(T)];
    std::uint64_t v = 0;
    std::memcpy(&v, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get_raw_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof buf);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    T out;
    std::memcpy(&out, &v, sizeof(T));
    return out;
}

} // namespace

GraphIndex::GraphIndex(GraphIndex&& other) noexcept { *this = std::move(other); }

GraphIndex& GraphIndex::operator=(GraphIndex&& other) noexcept {
    dimension_ = other.dimension_;
    config_ = other.config_;
    pins_ = std::move(other.pins_);
    vectors_ = std::move(other.vectors_);
    levels_ = std::move(other.levels_);
    entry_point_ = other.entry_point_;
    max_level_ = other.max_level_;
    adjacency_ = std::move(other.adjacency_);
    traversals_.store(other.traversals_.load(std::memory_order_relaxed),
                      std::memory_order_relaxed);
    return *this;
}

double GraphIndex::dist_to(std::span<const float> q, std::uint32_t node) const {
    const float* v = vectors_.data() + static_cast<std::size_t>(node) * dimension_;
    double dot = 0.0;
    for (std::size_t c = 0; c < dimension_; ++c)
        dot += static_cast<double>(q[c]) * static_cast<double>(v[c]);
    return 1.0 - dot;
}

void GraphIndex::search_layer(std::span<const float> q, std::uint32_t entry, std::size_t beam,
                              std::size_t layer,
                              std::vector<ScoredNode>& out) const {
    thread_local Visited visited;
    visited.reset(pins_.size());

    std::priority_queue<ScoredNode, std::vector<ScoredNode>, std::greater<>> frontier;
    std::priority_queue<ScoredNode> best; // max-heap: worst kept result on top

    const double d0 = dist_to(q, entry);
    visited.first_visit(entry);
    frontier.emplace(d0, entry);
    best.emplace(d0, entry);

    while (!frontier.empty()) {
        const auto [dist, node] = frontier.top();
        if (best.size() >= beam && dist > best.top().first) break;
        frontier.pop();
        for (const std::uint32_t nb : adjacency_[layer][node]) {
            if (!visited.first_visit(nb)) continue;
            const double d = dist_to(q, nb);
            if (best.size() < beam || d < best.top().first ||
                (d == best.top().first && nb < best.top().second)) {
                frontier.emplace(d, nb);
                best.emplace(d, nb);
                if (best.size() > beam) best.pop();
            }
        }
    }

    out.clear();
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::sort(out.begin(), out.end());
}

std::vector<std::uint32_t> GraphIndex::select_neighbors(
    std::uint32_t node, std::span<const ScoredNode> candidates, std::size_t want) const {
    // Diversified selection: keep a candidate only if it is closer to the new
    // node than to every neighbor kept so far, then backfill with the nearest
    // rejected ones.  Keeps the graph navigable in clustered data.
    std::vector<std::uint32_t> kept;
    std::vector<std::uint32_t> rejected;
    for (const auto& [dist, cand] : candidates) {
        if (kept.size() >= want) break;
        if (cand == node) continue;
        bool dominated = false;
        for (const std::uint32_t r : kept) {
            const float* a = vectors_.data() + static_cast<std::size_t>(cand) * dimension_;
            const float* b = vectors_.data() + static_cast<std::size_t>(r) * dimension_;
            double dot = 0.0;
            for (std::size_t c = 0; c < dimension_; ++c)
                dot += static_cast<double>(a[c]) * static_cast<double>(b[c]);
            if (1.0 - dot < dist) {
                dominated = true;
                break;
            }
        }
        if (dominated)
            rejected.push_back(cand);
        else
            kept.push_back(cand);
    }
    for (const std::uint32_t r : rejected) {
        if (kept.size() >= want) break;
        kept.push_back(r);
    }
    return kept;
}

GraphIndex GraphIndex::build(const PinStore& store, std::span<const PinId> pool,
                             const IndexConfig& config) {
    if (config.max_neighbors < 2) throw ValidationError("graph degree target must be at least 2");
    if (config.build_beam == 0 || config.query_beam == 0)
        throw ValidationError("beam widths must be positive");

    GraphIndex index;
    index.dimension_ = store.dimension();
    index.config_ = config;
    index.pins_.assign(pool.begin(), pool.end());
    std::sort(index.pins_.begin(), index.pins_.end());
    if (std::adjacent_find(index.pins_.begin(), index.pins_.end()) != index.pins_.end())
        throw ValidationError("pool contains duplicate pin ids");

    const std::size_t n = index.pins_.size();
    index.vectors_.resize(n * index.dimension_);
    for (std::size_t i = 0; i < n; ++i) {
        const auto normalized = l2_normalized(store.embedding(index.pins_[i]));
        std::copy(normalized.begin(), normalized.end(),
                  index.vectors_.begin() + i * index.dimension_);
    }
    if (n == 0) {
        index.adjacency_.emplace_back(); // empty layer 0
        return index;
    }

    // Geometric level draws, one per node in insertion order.
    const double level_scale = 1.0 / std::log(static_cast<double>(config.max_neighbors));
    Rng rng(config.seed);
    index.levels_.resize(n);
    std::uint32_t top = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.next_double_open();
        const auto level =
            std::min<std::uint32_t>(static_cast<std::uint32_t>(-std::log(u) * level_scale),
                                    kMaxLevelCap);
        index.levels_[i] = level;
        top = std::max(top, level);
    }
    index.max_level_ = top;
    index.adjacency_.assign(top + 1, std::vector<std::vector<std::uint32_t>>(n));

    const std::size_t M = config.max_neighbors;
    const auto cap_for = [M](std::size_t layer) { return layer == 0 ? 2 * M : M; };

    const auto node_span = [&](std::uint32_t node) {
        return std::span<const float>(
            index.vectors_.data() + static_cast<std::size_t>(node) * index.dimension_,
            index.dimension_);
    };

    index.entry_point_ = 0;
    std::uint32_t current_top = index.levels_[0];
    std::vector<ScoredNode> found;
    std::vector<ScoredNode> shrink_pool;

    for (std::uint32_t node = 1; node < n; ++node) {
        const std::span<const float> q = node_span(node);
        const std::uint32_t node_level = index.levels_[node];
        std::uint32_t ep = index.entry_point_;

        for (std::uint32_t layer = current_top; layer > node_level; --layer) {
            index.search_layer(q, ep, 1, layer, found);
            ep = found.front().second;
        }

        for (std::uint32_t layer = std::min(current_top, node_level);; --layer) {
            index.search_layer(q, ep, config.build_beam, layer, found);
            const auto selected = index.select_neighbors(node, found, M);

            auto& own_list = index.adjacency_[layer][node];
            own_list = selected;
            for (const std::uint32_t nb : selected) {
                auto& list = index.adjacency_[layer][nb];
                list.push_back(node);
                if (list.size() > cap_for(layer)) {
                    // Re-select the neighbor's list under the same heuristic.
                    shrink_pool.clear();
                    const std::span<const float> nb_vec = node_span(nb);
                    for (const std::uint32_t cand : list)
                        shrink_pool.emplace_back(index.dist_to(nb_vec, cand), cand);
                    std::sort(shrink_pool.begin(), shrink_pool.end());
                    list = index.select_neighbors(nb, shrink_pool, cap_for(layer));
                }
            }
            ep = found.front().second;
            if (layer == 0) break;
        }

        if (node_level > current_top) {
            current_top = node_level;
            index.entry_point_ = node;
        }
    }

    // Repair pass: make adjacency symmetric per layer (missing reverse edges
    // are added; degrees may exceed the cap).  Lists end sorted by
    // (distance-to-owner, id) for deterministic traversal order.
    for (std::uint32_t layer = 0; layer <= index.max_level_; ++layer) {
        auto& layer_adj = index.adjacency_[layer];
        std::vector<std::pair<std::uint32_t, std::uint32_t>> missing;
        for (std::uint32_t a = 0; a < n; ++a) {
            for (const std::uint32_t b : layer_adj[a]) {
                const auto& back = layer_adj[b];
                if (std::find(back.begin(), back.end(), a) == back.end())
                    missing.emplace_back(b, a);
            }
        }
        for (const auto& [from, to] : missing) layer_adj[from].push_back(to);
        for (std::uint32_t a = 0; a < n; ++a) {
            auto& list = layer_adj[a];
            shrink_pool.clear();
            for (const std::uint32_t nb : list)
                shrink_pool.emplace_back(index.dist_to(node_span(a), nb), nb);
            std::sort(shrink_pool.begin(), shrink_pool.end());
            list.clear();
            for (const auto& [dist, nb] : shrink_pool)
                if (list.empty() || list.back() != nb) list.push_back(nb);
        }
    }
    return index;
}

std::vector<Neighbor> GraphIndex::query(std::span<const float> query, std::size_t k,
                                        std::size_t beam) const {
    if (query.size() != dimension_)
        throw ValidationError("query dimension " + std::to_string(query.size()) +
                              " does not match index dimension " + std::to_string(dimension_));
    traversals_.fetch_add(1, std::memory_order_relaxed);
    if (pins_.empty() || k == 0) return {};

    const std::vector<float> q = l2_normalized(query);
    std::size_t effective_beam = beam == 0 ? config_.query_beam : beam;
    effective_beam = std::max(effective_beam, k);

    std::vector<ScoredNode> found;
    std::uint32_t ep = entry_point_;
    for (std::uint32_t layer = max_level_; layer > 0; --layer) {
        search_layer(q, ep, 1, layer, found);
        ep = found.front().second;
    }
    search_layer(q, ep, effective_beam, 0, found);

    std::vector<Neighbor> out;
    out.reserve(std::min(k, found.size()));
    for (std::size_t i = 0; i < found.size() && out.size() < k; ++i)
        out.push_back({pins_[found[i].second], found[i].first});
    return out;
}

bool GraphIndex::contains(PinId pin) const {
    return std::binary_search(pins_.begin(), pins_.end(), pin);
}

std::span<const std::uint32_t> GraphIndex::neighbors_on_layer(std::size_t node,
                                                              std::size_t layer) const {
    return adjacency_[layer][node];
}

void GraphIndex::save(const std::filesystem::path& path) const {
    atomic_write_file(path, [&](std::ostream& out) {
        out.write(kIndexMagic, sizeof kIndexMagic);
        put_raw_le<std::uint32_t>(out, kIndexVersion);
        put_raw_le<std::uint32_t>(out, static_cast<std::uint32_t>(dimension_));
        put_raw_le<std::uint64_t>(out, pins_.size());
        put_raw_le<std::uint32_t>(out, config_.max_neighbors);
        put_raw_le<std::uint32_t>(out, config_.build_beam);
        put_raw_le<std::uint32_t>(out, config_.query_beam);
        put_raw_le<std::uint64_t>(out, config_.seed);
        put_raw_le<std::uint32_t>(out, entry_point_);
        put_raw_le<std::uint32_t>(out, max_level_);
        for (const PinId pin : pins_) put_raw_le<std::uint64_t>(out, pin);
        for (const std::uint32_t lvl : levels_) put_raw_le<std::uint32_t>(out, lvl);
        for (const float v : vectors_) put_raw_le<float>(out, v);
        for (std::uint32_t layer = 0; layer <= max_level_; ++layer) {
            for (std::size_t node = 0; node < pins_.size(); ++node) {
                const auto& list = adjacency_[layer][node];
                put_raw_le<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
                for (const std::uint32_t nb : list) put_raw_le<std::uint32_t>(out, nb);
            }
        }
    });
}

GraphIndex GraphIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    char magic[4];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kIndexMagic, sizeof magic) != 0)
        throw IoError("'" + path.string() + "' is not a graph index (bad magic)");
    const auto version = get_raw_le<std::uint32_t>(in);
    if (version != kIndexVersion)
        throw IoError("unsupported index version " + std::to_string(version));

    GraphIndex index;
    index.dimension_ = get_raw_le<std::uint32_t>(in);
    const auto count = get_raw_le<std::uint64_t>(in);
    index.config_.max_neighbors = get_raw_le<std::uint32_t>(in);
    index.config_.build_beam = get_raw_le<std::uint32_t>(in);
    index.config_.query_beam = get_raw_le<std::uint32_t>(in);
    index.config_.seed = get_raw_le<std::uint64_t>(in);
    index.entry_point_ = get_raw_le<std::uint32_t>(in);
    index.max_level_ = get_raw_le<std::uint32_t>(in);
    if (!in) throw IoError("truncated index header in '" + path.string() + "'");

    index.pins_.resize(count);
    for (auto& pin : index.pins_) pin = get_raw_le<std::uint64_t>(in);
    index.levels_.resize(count);
    for (auto& lvl : index.levels_) lvl = get_raw_le<std::uint32_t>(in);
    index.vectors_.resize(count * index.dimension_);
    for (auto& v : index.vectors_) v = get_raw_le<float>(in);
    index.adjacency_.assign(index.max_level_ + 1,
                            std::vector<std::vector<std::uint32_t>>(count));
    for (std::uint32_t layer = 0; layer <= index.max_level_; ++layer) {
        for (std::size_t node = 0; node < count; ++node) {
            const auto degree = get_raw_le<std::uint32_t>(in);
            auto& list = index.adjacency_[layer][node];
            list.resize(degree);
            for (auto& nb : list) nb = get_raw_le<std::uint32_t>(in);
        }
    }
    if (!in) throw IoError("truncated index body in '" + path.string() + "'");
    return index;
}

} // namespace facet::ann
