#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nystromite/errors.hpp"

namespace nystromite {

/// One SplitMix64 step. Advances `state` and returns the next word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of `master`. Pure function of its inputs, so
/// every run of an experiment can rebuild the exact same stream tree.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

/// mt19937_64 wrapper with hand-rolled draws. The standard <random>
/// distributions are implementation-defined, these helpers keep results
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform draw from [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, q = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  /// Uniform integer in [0, n). Rejection keeps the draw exactly uniform.
  std::uint64_t index(std::uint64_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "index() needs n > 0");
    const std::uint64_t overflow = (~0ULL % n + 1) % n;
    std::uint64_t r = engine_();
    while (overflow != 0 && r > ~0ULL - overflow) r = engine_();
    return r % n;
  }

  /// First k positions of a partial Fisher-Yates shuffle of 0..n-1,
  /// i.e. a uniform without-replacement sample in draw order.
  std::vector<long> sample_without_replacement(long n, long k) {
    if (k < 0 || n < 0 || k > n)
      fail(ErrorCode::InvalidArgument, "need 0 <= k <= n");
    std::vector<long> pool(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (long i = 0; i < k; ++i) {
      const long j =
          i + static_cast<long>(index(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nystromite
