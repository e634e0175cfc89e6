#pragma once

#include <cstdint>
#include <vector>

namespace loopcheck {

/// SplitMix64 generator. std::mt19937 is portable but the standard
/// distributions are not, so fixture generation rolls its own draws to keep
/// generated files byte-identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_below(uint64_t n) {
        // modulo bias is negligible for the small ranges used here
        return next_u64() % n;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform_real() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[uniform_below(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace loopcheck
