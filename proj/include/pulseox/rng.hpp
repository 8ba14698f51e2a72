#pragma once

#include <cstdint>

namespace pulseox {

// Counter-mode SplitMix64, the project's only randomness source.
//
// Every draw is a pure function of (seed, key) with no sequential state, so
// streams are reproducible bit-for-bit across runs, thread counts, and
// languages.  To port: 64-bit unsigned arithmetic with wrap-around.
//
//   z  = seed + (key + 1) * 0x9E3779B97F4A7C15
//   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//   z ^= z >> 27;  z *= 0x94D049BB133111EB
//   return z ^ (z >> 31)
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t z = seed + (key + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1): top 53 bits of the hash.
inline double uniform01(std::uint64_t seed, std::uint64_t key) {
    return static_cast<double>(splitmix64(seed, key) >> 11) * 0x1.0p-53;
}

// Quantization dither in [-0.5, 0.5).  Channels: 0 = red, 1 = ir, 2 = ambient.
inline double dither(std::uint64_t seed, std::uint64_t sample_index, unsigned channel) {
    return uniform01(seed, sample_index * 3 + channel) - 0.5;
}

} // namespace pulseox
