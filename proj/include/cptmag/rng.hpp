#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cptmag {

// splitmix64 finalizer: the standard 64-bit mixing function. Used in counter
// mode to derive statistically independent stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d49bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive the seed for (purpose, index) from a master seed. Purposes separate
// the field / count / charge / bootstrap streams; the index separates
// trajectories (or sweep points). Chained splitmix64 in counter mode.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                    std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(master ^ fnv1a64(purpose));
    return splitmix64(s + index);
}

// All stochastic components draw from mt19937_64 seeded through splitmix64,
// so nearby raw seeds still give decorrelated state.
inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

}  // namespace cptmag
