#pragma once

#include <cstdint>
#include <list>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "facet/ann.hpp"

namespace facet::ann {

// Shared LRU cache of medoid query results.  Medoids repeat heavily across
// users, so one graph traversal serves many requests.  Keys carry the fetch
// size and beam along with the medoid id, which makes a hit byte-identical to
// a fresh query.  get_or_compute is linearizable: the lock covers lookup,
// compute and insert.  Must be cleared (or replaced) when the index is
// rebuilt.
class MedoidCache {
public:
    explicit MedoidCache(std::size_t capacity);

    struct Key {
        PinId medoid = 0;
        std::uint32_t k = 0;
        std::uint32_t beam = 0;
        bool operator==(const Key&) const = default;
    };

    template <typename Fn>
    std::vector<Neighbor> get_or_compute(const Key& key, Fn&& compute) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = map_.find(key);
        if (it != map_.end()) {
            ++hits_;
            order_.splice(order_.begin(), order_, it->second.slot);
            return it->second.value;
        }
        ++misses_;
        std::vector<Neighbor> value = compute();
        insert_locked(key, value);
        return value;
    }

    void clear();
    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    std::uint64_t hits() const;
    std::uint64_t misses() const;

private:
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    struct Entry {
        std::vector<Neighbor> value;
        std::list<Key>::iterator slot;
    };

    void insert_locked(const Key& key, const std::vector<Neighbor>& value);

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Key> order_; // most recent first
    std::unordered_map<Key, Entry, KeyHash> map_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

// k nearest pins to the medoid's embedding, the medoid itself excluded.
// The medoid must exist in the store (it may legitimately be absent from the
// index when the serving pool was refined).  Pass a null cache to bypass
// caching; results are identical either way.
std::vector<Neighbor> query_by_medoid(const GraphIndex& index, MedoidCache* cache,
                                      const PinStore& store, PinId medoid, std::size_t k,
                                      std::size_t beam = 0);

} // namespace facet::ann
