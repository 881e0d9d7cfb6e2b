#pragma once

#include <cstdint>
#include <random>

namespace filtlab {

// Per-path substreams: the stream for (seed, tag, path) is a fixed function
// of its arguments, so ensembles are identical under any worker partitioning.
inline constexpr const char* kStreamScheme = "splitmix64-per-path-v1";

// Stream tags keep independent uses of the same (seed, path) pair apart.
enum class StreamTag : std::uint64_t {
    brownian = 0x1,
    bessel3 = 0x2,
    infimum_tail = 0x3,
    aux_noise = 0x4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_path_rng(std::uint64_t seed, StreamTag tag, std::uint64_t path) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
    s = splitmix64(s ^ path);
    return std::mt19937_64(s);
}

} // namespace filtlab
