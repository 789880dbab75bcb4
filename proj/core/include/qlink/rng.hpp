#pragma once

// Deterministic seeding helpers. All randomness in the project flows from one
// root seed through named sub-streams, so enabling or disabling one subsystem
// does not perturb another's stream.

#include <cstdint>
#include <random>
#include <string_view>

namespace qlink {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good bit mixing for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over the stream name, mixed with the root seed.
constexpr std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(root ^ h);
}

constexpr std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
    return mix64(root + 0x632be59bd9b4e019ULL * (index + 1));
}

}  // namespace qlink
