#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hashnet {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so bounded and real draws are done here.
/// Substreams are keyed by a tag and up to a few integers so that, e.g., the
/// pairing of round 7 never depends on how many draws the topology used.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng substream(std::uint64_t root, std::string_view tag,
                       std::initializer_list<std::uint64_t> keys = {}) {
    std::uint64_t state = root ^ fnv1a64(tag);
    std::uint64_t seed = splitmix64(state);
    for (std::uint64_t k : keys) {
      state ^= k + 0x632BE59BD9B4E019ULL;
      seed ^= splitmix64(state);
    }
    return Rng(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    // [threshold, 2^64) has a length divisible by bound.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace hashnet
