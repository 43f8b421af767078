#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rankinject/common.hpp"

namespace rankinject {

inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives a named child seed from the master seed. Every random choice in the
/// toolkit flows through a stream named like "attack/base/random/<qid>/<i>", so
/// identical (seed, name) pairs reproduce identical draws no matter in which
/// order instances are evaluated.
inline uint64_t stream_id(uint64_t master_seed, std::string_view purpose) {
    return mix64(fnv1a64(purpose, fnv1a64_u64(master_seed)));
}

/// mt19937_64 with bounded draws done by rejection sampling. The standard
/// pins down the raw engine output but not uniform_int_distribution, so doing
/// the reduction ourselves keeps sequences identical across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(mix64(seed)) {}

    uint64_t next() { return engine_(); }

    // Uniform in [0, n). n must be positive.
    uint64_t bounded(uint64_t n) {
        if (n == 0) throw Error("Rng::bounded: n must be positive");
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1), 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        if (v.empty()) throw Error("Rng::pick: empty vector");
        return v[static_cast<size_t>(bounded(v.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k elements of a seeded Fisher-Yates pass: a uniform k-subset of
    // [0, n) in random order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(bounded(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

inline Rng stream(uint64_t master_seed, std::string_view purpose) {
    return Rng(stream_id(master_seed, purpose));
}

}  // namespace rankinject
