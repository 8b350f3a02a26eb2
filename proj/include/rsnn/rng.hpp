#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rsnn {

// Deterministic draw helpers. The std:: distribution objects are
// implementation-defined, so anything that must replay bit-identically
// across toolchains draws through this wrapper instead.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // uniform in [0, 1) with 53 mantissa bits
    double unit() { return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Box-Muller, one value per call so replay never depends on call parity
    double normal(double mean, double stddev) {
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        double u2 = unit();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    size_t index(size_t n) { return static_cast<size_t>(gen_() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, pinned here instead of std::shuffle for replayability
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// FNV-1a 64, used for config digests and to derive sub-seeds from names
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// splitmix-style mixer for (seed, salt) -> independent stream seed
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace rsnn
