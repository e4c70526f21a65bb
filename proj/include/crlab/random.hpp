#pragma once

#include <cstdint>
#include <random>

namespace crlab {

// Seeded uniform source. Maps raw 64-bit draws to doubles explicitly so
// sequences do not depend on the standard library's distribution code.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crlab
