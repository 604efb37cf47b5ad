#pragma once

#include <cmath>
#include <cstdint>

namespace fairlens {

// Counter-based stream built on the splitmix64 finalizer. Draw i of stream
// (seed, stream_id) depends only on (seed, stream_id, i), so independent
// streams can be consumed in any order without changing the values drawn.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), base_(mix64(mix64(seed) + stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() { return mix64(base_ + counter_++); }

    // in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller (cosine branch); consumes two uniforms per call.
    double normal(double mu, double sigma) {
        if (sigma == 0.0) return mu;
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

// Stream-id layout: high 16 bits name the purpose, low 48 bits the element
// index. Keeps per-profile streams disjoint from global ones.
inline std::uint64_t stream_id(std::uint16_t purpose, std::uint64_t index = 0) {
    return (static_cast<std::uint64_t>(purpose) << 48) | (index & 0xFFFFFFFFFFFFULL);
}

}  // namespace fairlens
