#pragma once

#include <cstdint>

#include "webqoe/scaling/probit.hpp"

namespace webqoe::sim {

// 64-bit mix used as the SplitMix64 output stage.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// SplitMix64: state steps by the golden-ratio constant, outputs mix64 of
// the new state. The exact recurrence is documented in the README so other
// implementations can reproduce identical streams.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1), 53-bit resolution, never 0 or 1.
  double uniform_open01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53; }

  bool bernoulli(double p) { return uniform_open01() < p; }

  double normal(double mean, double sd) {
    return mean + sd * scaling::probit(uniform_open01());
  }

 private:
  std::uint64_t state_;
};

// Decorrelated child seed for a numbered stream of a parent seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
}

}  // namespace webqoe::sim
