#pragma once

#include <cstdint>

namespace pcaldp {

// Counter-based generator: every draw is a pure hash of (seed, stream, step,
// slot), so trajectories are reproducible bit-for-bit regardless of the order
// draws are made in and across platforms.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                          std::uint64_t slot) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(stream + 0xA0761D6478BD642FULL));
    h = mix64(h ^ mix64(step + 0xE7037ED1A0B428DBULL));
    h = mix64(h ^ mix64(slot + 0x8EBC6AF09C88C6E3ULL));
    return h;
}

// uniform in [0, 1) with 53 bits
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                      std::uint64_t slot) {
    return to_unit(hash(seed, stream, step, slot));
}

}  // namespace rng

}  // namespace pcaldp
