#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, time index, lane), so encoder and decoder can regenerate
// the exact same dither for a received description without consuming a
// shared sequence, and distinct noise sources never alias.
namespace stabcode::rng {

enum class Stream : std::uint64_t {
    disturbance = 0x01,
    dither      = 0x02,
    channel     = 0x03,
    generic     = 0x04,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, Stream stream, std::uint64_t t, std::uint64_t lane) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ t);
    h = splitmix64(h ^ lane);
    return h;
}

// Uniform on (0, 1]; never returns 0 so it is safe under log().
inline double uniform_open(std::uint64_t seed, Stream stream, std::uint64_t t, std::uint64_t lane) {
    const std::uint64_t h = counter_hash(seed, stream, t, lane);
    return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

// Uniform on [0, 1).
inline double uniform01(std::uint64_t seed, Stream stream, std::uint64_t t, std::uint64_t lane) {
    const std::uint64_t h = counter_hash(seed, stream, t, lane);
    return static_cast<double>(h >> 11) * 0x1p-53;
}

// Standard normal via Box-Muller on two counter draws.
inline double gaussian(std::uint64_t seed, Stream stream, std::uint64_t t, std::uint64_t lane) {
    const double u1 = uniform_open(seed, stream, t, 2 * lane);
    const double u2 = uniform01(seed, stream, t, 2 * lane + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace stabcode::rng
