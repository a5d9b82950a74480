#pragma once

#include <cstdint>

namespace hubline {

// SplitMix64. Fixed here (rather than std::mt19937_64 + distributions) so that
// streams are bit-identical across platforms and standard-library versions;
// seeded runs must reproduce exactly.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1): next() scaled by 2^-64.
  double next_uniform() noexcept { return static_cast<double>(next()) * 0x1.0p-64; }

  // Uniform in {0, ..., bound-1}. Modulo bias is negligible for the small
  // bounds used here and keeps the draw sequence trivially reproducible.
  std::uint64_t next_below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

}  // namespace hubline
