#pragma once

#include <cstdint>
#include <random>

namespace elliptw {

/// splitmix64 step; used to hash (seed, counter) pairs into stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-stream RNG: stream k of a campaign with base seed s is
/// independent of how many threads consume the streams. Each trial owns one.
inline std::mt19937_64 make_stream(std::uint64_t seed_base, std::uint64_t stream_id) {
    std::uint64_t s = seed_base ^ (0x6a09e667f3bcc909ULL + stream_id * 0x3c6ef372fe94f82bULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace elliptw
