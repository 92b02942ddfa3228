#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace itf {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a, 64 bit.
constexpr std::uint64_t hash64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Sub-seed for stream `index` of a run seeded with `seed`: mix64(seed ^ index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return mix64(seed ^ index); }

/// Seeded generator with platform-independent variate conversions.
///
/// std::mt19937_64's output sequence is fixed by the standard; the std:: distributions
/// are not, so conversions to uniform/normal/categorical are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi].
  long between(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Index drawn proportionally to non-negative `weights`.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace itf
