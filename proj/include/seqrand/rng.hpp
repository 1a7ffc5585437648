// rng.hpp - seedable, splittable random generator with a fixed derivation rule
#pragma once

#include <cstdint>
#include <random>

namespace seqrand {

// SplitMix64 step; also the seed-mixing primitive used by derive_seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic child-seed rule: two SplitMix64 rounds over (master, stream).
// Children are a pure function of their arguments, so parallel and serial
// execution schedules see identical streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (stream + 1));
    (void)splitmix64(s);
    return splitmix64(s);
}

// Owns one stream. Never share an instance across threads; split() instead.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : seed_(seed), engine_(derive_seed(seed, 0)) {}

    // Independent child stream; a pure function of (seed, stream).
    SplitRng split(std::uint64_t stream) const { return SplitRng(derive_seed(seed_, stream + 1)); }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits; avoids std::uniform_real_distribution
    // whose output is implementation-defined.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace seqrand
