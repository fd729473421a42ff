#include "facet/medoid_cache.hpp"

#include "facet/errors.hpp"
#include "facet/rng.hpp"

namespace facet::ann {

MedoidCache::MedoidCache(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("cache capacity must be positive");
}

std::size_t MedoidCache::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = detail::mix64(k.medoid);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(k.k) << 32 | k.beam));
    return static_cast<std::size_t>(h);
}

void MedoidCache::insert_locked(const Key& key, const std::vector<Neighbor>& value) {
    if (map_.size() >= capacity_) {
        const Key& oldest = order_.back();
        map_.erase(oldest);
        order_.pop_back();
    }
    order_.push_front(key);
    map_.emplace(key, Entry{value, order_.begin()});
}

void MedoidCache::clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    map_.clear();
    order_.clear();
    hits_ = 0;
    misses_ = 0;
}

std::size_t MedoidCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
}

std::uint64_t MedoidCache::hits() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return hits_;
}

std::uint64_t MedoidCache::misses() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return misses_;
}

std::vector<Neighbor> query_by_medoid(const GraphIndex& index, MedoidCache* cache,
                                      const PinStore& store, PinId medoid, std::size_t k,
                                      std::size_t beam) {
    const auto compute = [&]() {
        // Fetch one extra so the medoid's own entry never displaces a result.
        auto raw = index.query(store.embedding(medoid), k + 1, std::max(beam, k + 1));
        std::vector<Neighbor> out;
        out.reserve(k);
        for (const Neighbor& n : raw) {
            if (n.pin == medoid) continue;
            out.push_back(n);
            if (out.size() == k) break;
        }
        return out;
    };
    if (!cache) return compute();
    const MedoidCache::Key key{medoid, static_cast<std::uint32_t>(k),
                               static_cast<std::uint32_t>(beam)};
    return cache->get_or_compute(key, compute);
}

} // namespace facet::ann
