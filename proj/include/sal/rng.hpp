#pragma once

#include <cstdint>

namespace sal {

/// SplitMix64 (Steele, Lea & Flood 2014; the seeding generator published with
/// xoshiro). Integer-only state update, so streams are identical on every
/// platform. Test vectors live in tests/test_bench_data.cpp.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two uniforms, uses the cosine branch.
  double next_normal();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Independent stream for a (seed, stream) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  return g.next_u64();
}

}  // namespace sal
