#include "facet/pin_store.hpp"

#include <cmath>
#include <string>

#include "facet/errors.hpp"

namespace facet {

PinStore::PinStore(std::size_t dimension) : dimension_(dimension) {
    if (dimension < 2) throw ValidationError("embedding dimension must be at least 2");
}

void PinStore::add(PinId id, std::span<const float> embedding, float quality) {
    if (embedding.size() != dimension_)
        throw ValidationError("pin " + std::to_string(id) + " has dimension " +
                              std::to_string(embedding.size()) + ", store expects " +
                              std::to_string(dimension_));
    if (index_.count(id))
        throw ValidationError("duplicate pin id " + std::to_string(id));
    for (const float v : embedding)
        if (!std::isfinite(v))
            throw ValidationError("pin " + std::to_string(id) + " has a non-finite coordinate");
    if (!(quality >= 0.0f && quality <= 1.0f))
        throw ValidationError("pin " + std::to_string(id) + " quality out of [0, 1]");

    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    values_.insert(values_.end(), embedding.begin(), embedding.end());
    quality_.push_back(quality);
}

std::optional<std::size_t> PinStore::find(PinId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> PinStore::embedding(PinId id) const {
    const auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown pin id " + std::to_string(id));
    return row(it->second);
}

float PinStore::quality(PinId id) const {
    const auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown pin id " + std::to_string(id));
    return quality_[it->second];
}

} // namespace facet
