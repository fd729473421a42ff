#pragma once

#include <span>
#include <vector>

namespace facet {

// All kernels accumulate in double regardless of the float32 storage format
// and raise ValidationError on dimension mismatch.

double squared_euclidean(std::span<const float> a, std::span<const float> b);
double dot_product(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> a);

// Clamped to [-1, 1] so downstream acos/threshold logic never sees a value
// pushed out of range by rounding.  Zero-norm input is a hard error.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// 1 - cosine_similarity, in [0, 2].
double cosine_distance(std::span<const float> a, std::span<const float> b);

// Copy of `a` scaled to unit L2 norm.  Zero-norm input is a hard error.
std::vector<float> l2_normalized(std::span<const float> a);

} // namespace facet
