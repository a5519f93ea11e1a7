#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace dualseq {

/// Seeded pseudo-random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// derives floats and bounded integers from raw 64-bit draws so that results
/// are identical across standard library implementations (the std
/// distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, a, b, ...), e.g. one stream per corpus line.
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) : engine_(mix(seed, stream)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    std::uint64_t mixed = splitmix(seed);
    for (auto s : stream) mixed = splitmix(mixed ^ splitmix(s));
    return mixed;
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace dualseq
