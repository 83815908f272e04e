#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <algorithm>

namespace dacc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream id for a (seed, tag) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(splitmix64(seed) ^ tag); }

/// mt19937_64 with hand-written distributions, so sequences do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Inclusive range.
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return std::min(hi, lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1)));
  }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  bool bernoulli(double p) { return uniform() < p; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::iter_swap(first + (i - 1), first + integer(0, i - 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dacc
