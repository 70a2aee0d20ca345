#pragma once

#include <cstdint>

namespace negurn {

// SplitMix64, used for seeding and for deriving independent per-replica
// stream seeds from (base_seed, stream_index).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// Stream seed for replica `index`; distinct indices give decorrelated
/// generator states for any base seed.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t index) {
    SplitMix64 mix(base_seed);
    std::uint64_t a = mix.next();
    SplitMix64 mix2(index ^ 0xD1B54A32D192ED03ULL);
    return a ^ mix2.next();
}

// xoshiro256++ (Blackman & Vigna). One 64-bit draw per simulation step.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 mix(seed);
        for (auto& word : s_) word = mix.next();
        // the all-zero state is invalid
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace negurn
