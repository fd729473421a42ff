#pragma once

#include <cmath>
#include <cstdint>

namespace facet {

namespace detail {
// SplitMix64 finalizer.  Pure 64-bit integer arithmetic, so the sequence is
// identical on every platform.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Counter-based deterministic generator: the n-th output is a pure function
// of (seed, n).  fork() derives an independent stream, which keeps results
// reproducible when work is partitioned across threads in any order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return detail::mix64(seed_ + counter_++ * 0x9e3779b97f4a7c15ULL); }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    // Uniform integer in [0, n); n must be positive.  Rejection sampling keeps
    // the distribution unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Standard normal via Box-Muller.  Each call consumes two uniforms.
    double next_gaussian() {
        const double u = next_double_open();
        const double v = next_double();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

    // Independent stream for a given id; streams with distinct ids do not
    // collide for any practical draw count.
    Rng fork(std::uint64_t stream) const {
        return Rng(detail::mix64(seed_ ^ detail::mix64(stream + 0x5851f42d4c957f2dULL)));
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace facet
