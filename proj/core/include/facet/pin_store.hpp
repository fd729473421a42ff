#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "facet/types.hpp"

namespace facet {

// Immutable-once-loaded catalog of pin embeddings.  Coordinates are stored as
// float32 (the on-disk format); every id is unique; every coordinate is
// finite; quality is in [0, 1].  Iteration over ids() follows insertion
// order, which for blobs written by this project is ascending pin id.
class PinStore {
public:
    explicit PinStore(std::size_t dimension);

    // Rejects duplicate ids, non-finite coordinates, wrong dimension and
    // out-of-range quality.
    void add(PinId id, std::span<const float> embedding, float quality = 1.0f);

    bool contains(PinId id) const { return index_.count(id) != 0; }
    std::optional<std::size_t> find(PinId id) const;

    // Hard error on unknown id.
    std::span<const float> embedding(PinId id) const;
    float quality(PinId id) const;

    std::span<const float> row(std::size_t i) const {
        return {values_.data() + i * dimension_, dimension_};
    }
    PinId id_at(std::size_t i) const { return ids_[i]; }
    float quality_at(std::size_t i) const { return quality_[i]; }

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<PinId>& ids() const { return ids_; }

private:
    std::size_t dimension_;
    std::vector<PinId> ids_;
    std::vector<float> values_;
    std::vector<float> quality_;
    std::unordered_map<PinId, std::size_t> index_;
};

} // namespace facet
