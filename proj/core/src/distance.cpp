#include "facet/distance.hpp"

#include <algorithm>
#include <cmath>

#include "facet/errors.hpp"

namespace facet {

namespace {
void require_same_dimension(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw ValidationError("dimension mismatch: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
}
} // namespace

double squared_euclidean(std::span<const float> a, std::span<const float> b) {
    require_same_dimension(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double dot_product(std::span<const float> a, std::span<const float> b) {
    require_same_dimension(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

double l2_norm(std::span<const float> a) {
    double acc = 0.0;
    for (const float v : a) acc += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(acc);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    require_same_dimension(a, b);
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0)
        throw ValidationError("cosine similarity undefined for zero-norm vector");
    const double cos = dot_product(a, b) / (na * nb);
    return std::clamp(cos, -1.0, 1.0);
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
    return 1.0 - cosine_similarity(a, b);
}

std::vector<float> l2_normalized(std::span<const float> a) {
    const double norm = l2_norm(a);
    if (norm == 0.0) throw ValidationError("cannot normalize zero-norm vector");
    std::vector<float> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<float>(static_cast<double>(a[i]) / norm);
    return out;
}

} // namespace facet
