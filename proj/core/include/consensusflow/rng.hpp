#pragma once

#include <cstdint>
#include <random>

namespace consensusflow {

// Deterministic uniform generator. std::mt19937_64 has a fixed, portable
// output sequence for a given seed; the double conversion below uses the top
// 53 bits so results are bit-identical across platforms, unlike
// std::uniform_real_distribution whose algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in {0, 1, ..., n-1} via rejection-free modulo on the top
  // bits; n is expected to be tiny relative to 2^64 so bias is negligible
  // for instance generation, but we keep a rejection loop to stay exact.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace consensusflow
