#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qsr {

// One master seed per run; every consumer derives a child stream from a
// label path ("regions/theta3/restart7").  Streams are therefore stable
// under reordering of unrelated work, which is what makes run outputs
// byte-identical for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix(seed)) {}

  Rng sub(std::string_view label) const {
    return Rng(splitmix(seed_ ^ fnv1a(label)));
  }
  Rng sub(std::string_view label, std::uint64_t index) const {
    return sub(label).sub_index(index);
  }

  std::uint64_t bits() { return engine_(); }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; second variate intentionally discarded to keep the draw
  // count per call fixed.
  double gauss() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // uniform integer in [0, n)
  std::uint64_t integer(std::uint64_t n) {
    // rejection sampling keeps the distribution exact
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x = bits();
    while (x >= limit) x = bits();
    return x % n;
  }

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  Rng sub_index(std::uint64_t index) const {
    return Rng(splitmix(seed_ ^ splitmix(index + 0x51ed2701)));
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qsr
