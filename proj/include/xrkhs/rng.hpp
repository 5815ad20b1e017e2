#pragma once

#include <cmath>
#include <cstdint>

namespace xrkhs {

// Counter-based pseudo-random stream built on SplitMix64 (Steele, Lea & Vigna,
// "Fast splittable pseudorandom number generators"). Each (seed, stream_id)
// pair yields an independent deterministic stream, so noise entries and angle
// draws reproduce bit-for-bit regardless of evaluation order or thread count.
//
// Stream-splitting rule: the initial state is
//   mix(seed) XOR mix(stream_id * 0xDA942042E4DD58B5)
// where mix is the SplitMix64 output function. stream_id 0 is reserved for
// single-stream use.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(seed) ^ mix(stream_id * 0xDA942042E4DD58B5ULL)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    return mix_steps(z);
  }

  // Uniform on (0, 1]; never returns 0 so it is safe under log().
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (explicit formula, no library
  // distribution, so draws are identical across standard libraries).
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  static std::uint64_t mix(std::uint64_t z) {
    return mix_steps(z + 0x9E3779B97F4A7C15ULL);
  }

 private:
  static std::uint64_t mix_steps(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Derives the seed for repetition `rep` of an experiment from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t rep) {
  return SplitMix64::mix(base ^ SplitMix64::mix(rep));
}

}  // namespace xrkhs
