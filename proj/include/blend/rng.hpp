#pragma once

#include <cstdint>

namespace blend {

// splitmix64; small state, so every sample index can own a stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    static std::uint64_t stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 g(seed ^ (index * 0xD1B54A32D192ED03ULL));
        return g.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace blend
