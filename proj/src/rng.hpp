#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lceval {

// All randomness in the library flows through these helpers on top of
// std::mt19937_64, whose output sequence is fixed by the standard. The
// distribution helpers are hand-rolled because the std:: distributions are
// implementation-defined and would break cross-platform reproducibility.

using Rng = std::mt19937_64;

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t mix_seed(uint64_t seed, std::string_view tag) {
    return seed ^ fnv1a64(tag);
}

// Uniform integer in [0, n) by rejection sampling.
inline uint64_t uniform_below(Rng& rng, uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices drawn from [0, n), in draw order.
inline std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<size_t> out;
    out.reserve(k);
    for (size_t i = 0; i < k && i < n; ++i) {
        size_t j = i + static_cast<size_t>(uniform_below(rng, n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace lceval
