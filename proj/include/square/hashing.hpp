#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace square {

/// 64-bit FNV-1a. Used for content fingerprints, config hashes and
/// per-example PRNG seeding; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Lower-case, zero-padded 16-digit hex rendering.
std::string to_hex(std::uint64_t value);

/// SplitMix64 (Steele, Lea, Flood 2014). The only PRNG in the project, so
/// sampling and shuffling are reproducible bit-for-bit on any platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform integer in [low, high], inclusive.
    std::uint64_t in_range(std::uint64_t low, std::uint64_t high) {
        return low + below(high - low + 1);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Seed for an independent stream keyed by (seed, key).
std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view key);

}  // namespace square
