#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "quqcd/errors.hpp"

namespace quqcd {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Counter-based splitmix64 stream. Streams derived from distinct
/// (seed, stream) pairs are decorrelated, so Monte Carlo trials can draw from
/// per-trial streams in any execution order and still reproduce bitwise.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : state_(mix64(seed + 0x632be59bd9b4e019ULL)) {}

  static CounterRng for_stream(std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(0);
    const std::uint64_t a = mix64(seed + 0x632be59bd9b4e019ULL);
    const std::uint64_t b = mix64(stream + 0x9e3779b97f4a7c15ULL);
    rng.state_ = mix64(a ^ (b * 0xff51afd7ed558ccdULL));
    return rng;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double next_gaussian() {
    double u1 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Standard exponential (rate 1); consumes one uniform.
  double next_exponential() {
    double u = next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(u);
  }

 private:
  std::uint64_t state_;
};

/// Inverse-CDF sampler over a fixed finite distribution. One uniform per
/// sample; the cumulative table is scaled by its own total so slightly
/// unnormalized inputs stay safe.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> probs) {
    if (probs.empty()) throw Error(ErrorKind::BadInput, "empty distribution");
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] < 0.0)
        throw Error(ErrorKind::BadInput, "negative probability entry");
      acc += probs[i];
      cdf_[i] = acc;
    }
    if (acc <= 0.0)
      throw Error(ErrorKind::BadInput, "distribution has zero total mass");
  }

  int sample(CounterRng& rng) const {
    const double u = rng.next_double() * cdf_.back();
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cdf_[mid]) hi = mid; else lo = mid + 1;
    }
    return static_cast<int>(lo);
  }

  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

}  // namespace quqcd
