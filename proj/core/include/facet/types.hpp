#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace facet {

using PinId = std::uint64_t;
using UserId = std::uint64_t;

// Row-major matrix of float32 coordinates.  Arithmetic on these values is
// carried out in double; float is only the storage format.
struct PointSet {
    std::size_t dimension = 0;
    std::vector<float> values; // size() * dimension entries

    PointSet() = default;
    explicit PointSet(std::size_t dim) : dimension(dim) {}

    std::size_t size() const { return dimension == 0 ? 0 : values.size() / dimension; }

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * dimension, dimension};
    }

    void add(std::span<const float> point) {
        values.insert(values.end(), point.begin(), point.end());
    }
};

enum class ActionKind : std::uint8_t { repin, click, impression };

// Repins and clicks are engagements and feed the interest model; impressions
// are only used as ranking negatives.
inline bool is_engagement(ActionKind kind) { return kind != ActionKind::impression; }

struct ActionRecord {
    PinId pin = 0;
    std::int64_t timestamp = 0; // seconds since the Unix epoch, UTC
    ActionKind kind = ActionKind::repin;
};

// One user's activity, sorted by non-decreasing timestamp.
struct ActionLog {
    UserId user = 0;
    std::vector<ActionRecord> records;
};

} // namespace facet
