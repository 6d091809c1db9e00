#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace gale {

// splitmix64 finalizer. Stage and per-document seeds are derived from one
// master seed so parallel and serial runs draw identical streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return mix64(seed ^ mix64(stream ^ mix64(index)));
}

// Fixed stream tags; every seeded stage draws from its own derived stream.
namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kValidationSplit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kExplain = 4;
inline constexpr std::uint64_t kBaseline = 5;
}  // namespace streams

// mt19937_64 with hand-rolled bounded draws. std::uniform_int_distribution is
// not pinned by the standard, so all sampling here goes through rejection
// sampling on raw engine output; artifacts stay byte-identical across
// standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t r = std::numeric_limits<std::uint64_t>::max() % n;
    if (r == n - 1) return engine_() % n;  // n divides 2^64
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - r;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct indices drawn uniformly from {0, .., n-1} (partial
  // Fisher-Yates; order is part of the draw).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + below(n - i)]);
    }
    pool.resize(k);
    return pool;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace gale
