#pragma once

#include <cmath>
#include <cstdint>

namespace lamp {

// Counter-style generator in the SplitMix64 family: the state walks an odd
// Weyl increment and the output is a finalizing hash of the counter.
// split(master_seed, stream) derives both the starting counter and the
// increment from the pair, so replicate streams are distinct sequences
// rather than offsets of a single orbit (the SplittableRandom scheme).
class Rng {
 public:
  Rng(std::uint64_t state, std::uint64_t increment)
      : state_(state), inc_(increment | 1ull) {}

  static Rng split(std::uint64_t master_seed, std::uint64_t stream) {
    const std::uint64_t s =
        mix(master_seed ^ mix(stream + 0x9E3779B97F4A7C15ull));
    const std::uint64_t g = mix(s + 0xBF58476D1CE4E5B9ull) | 1ull;
    return Rng(s, g);
  }

  std::uint64_t next_u64() {
    state_ += inc_;
    return mix(state_);
  }

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]; safe as a log argument
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace lamp
