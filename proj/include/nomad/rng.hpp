#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nomad {

// Seeded generator with hand-rolled draw helpers so event streams are
// reproducible across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  bool bernoulli(double p) { return uniform01() < p; }

  // uniform on {0, ..., n-1}
  std::int64_t below(std::int64_t n) {
    return static_cast<std::int64_t>(uniform01() * static_cast<double>(n)) % n;
  }

  // index drawn proportionally to nonnegative weights summing to total
  template <typename Weights>
  int weighted(const Weights& w, int count, double total) {
    double u = uniform01() * total;
    for (int i = 0; i < count - 1; ++i) {
      u -= w[i];
      if (u < 0.0) return i;
    }
    return count - 1;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nomad
