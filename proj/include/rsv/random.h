#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rsv {

/// SplitMix64 finalizer; derives independent stream seeds from (seed, stream ids).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

/**
 * Portable generator: std::mt19937_64 (fully specified by the standard) with uniforms
 * built from the top 53 bits, so draws are identical across platforms and standard libraries.
 */
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Index drawn from a probability row by inverse CDF. Zero-mass entries are never returned.
    std::size_t categorical(std::span<const double> row);

   private:
    std::mt19937_64 engine_;
};

}  // namespace rsv
