#pragma once

#include <cstdint>

namespace stochlab {

/// Counter-based splittable generator. Every draw is a pure hash of
/// (key, counter), so adding probes or reordering consumers never shifts
/// the draws of an independently split stream.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(derive_key(seed, stream)) {}

  /// Child generator with an independent stream; does not advance this one.
  SplitRng split(std::uint64_t stream) const noexcept {
    return SplitRng(key_, stream ^ 0x94d049bb133111ebULL);
  }

  std::uint64_t next_u64() noexcept { return mix(key_ + increment(counter_++)); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept { return next_u64() % n; }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() noexcept;

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;

 private:
  static std::uint64_t increment(std::uint64_t counter) noexcept {
    return counter * 0x9e3779b97f4a7c15ULL;
  }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t k = mix(seed + 0x9e3779b97f4a7c15ULL);
    k = mix(k ^ (stream + 0xbf58476d1ce4e5b9ULL));
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stochlab
