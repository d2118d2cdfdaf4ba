#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace chatdrift {

// Deterministic helpers on top of mt19937_64. std::shuffle and the
// distribution classes are implementation-defined, so everything that feeds a
// "same seed => same output" contract goes through these instead.

// Uniform integer in [0, n) by rejection sampling; n must be > 0.
inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = g();
    } while (v >= limit);
    return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Fisher-Yates, stable across platforms.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& g) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx, g);
    return idx;
}

} // namespace chatdrift
