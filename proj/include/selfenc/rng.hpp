#pragma once

// Seeded random generation with a fixed cross-platform mapping to doubles.
// The engine is std::mt19937_64, whose raw output sequence is pinned by the
// standard. Draws below avoid std::*_distribution on purpose: those are
// implementation-defined and would break byte-identical reproducibility
// between standard libraries.

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selfenc {

namespace detail {
// splitmix64 finalizer, used to derive independent child seeds.
inline std::uint64_t seed_mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Single-owner generator: never share one instance across tasks; derive a
// child with a distinct stream id instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1): top 53 bits of one engine word.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (!(lo < hi))
      throw std::invalid_argument("Rng::uniform: requires lo < hi, got [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + ")");
    return lo + (hi - lo) * next_unit();
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool coin() { return (engine_() & 1ULL) != 0; }

  // Fisher-Yates, in place.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Uniform s-subset of {0..n-1}, returned ascending.
  std::vector<std::size_t> choice_without_replacement(std::size_t n, std::size_t s) {
    if (s > n)
      throw std::invalid_argument("Rng::choice_without_replacement: s=" + std::to_string(s) +
                                  " exceeds n=" + std::to_string(n));
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // Partial Fisher-Yates: the first s entries are a uniform subset.
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(s);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  // Child generator for an independent task (fold, trial, ...).
  Rng child(std::uint64_t stream) const {
    return Rng(detail::seed_mix(seed_ ^ detail::seed_mix(stream)));
  }

  std::uint64_t child_seed(std::uint64_t stream) const {
    return detail::seed_mix(seed_ ^ detail::seed_mix(stream));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace selfenc
