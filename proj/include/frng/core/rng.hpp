#pragma once

#include <cstdint>

namespace frng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// PCG32 (Melissa O'Neill, minimal variant). One instance per logical stream;
// independent streams come from hashing (seed, stream ids) into the init.
struct Pcg32 {
    std::uint64_t state = 0x853c49e6748fea9bull;
    std::uint64_t inc = 0xda3e39cb94b95bdbull;

    Pcg32() = default;
    Pcg32(std::uint64_t seed, std::uint64_t stream = 0) { init(seed, stream); }

    void init(std::uint64_t seed, std::uint64_t stream = 0) {
        state = 0;
        inc = (splitmix64(stream) << 1u) | 1u;
        next_u32();
        state += splitmix64(seed);
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state;
        state = old * 6364136223846793005ull + inc;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // Uniform in [0, 1).
    float next_float() { return static_cast<float>(next_u32() >> 8) * 0x1.0p-24f; }
    double next_double() { return static_cast<double>(next_u32()) * 0x1.0p-32; }

    // Uniform in [lo, hi).
    float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

    std::uint32_t next_below(std::uint32_t bound) {
        // Lemire-style rejection-free enough for non-crypto use.
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(next_u32()) * bound) >> 32);
    }
};

} // namespace frng
