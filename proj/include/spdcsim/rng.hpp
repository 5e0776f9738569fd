#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based RNG (Philox4x32-10, Salmon et al. 2011) wrapped in keyed
// substreams. Every stochastic entity in a simulation (a pair, a dark-count
// cell, a Franson outcome) draws from its own (seed, stream, entity) keyed
// stream, so results do not depend on processing order or slab partitioning.

namespace spdcsim {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  lo = static_cast<uint32_t>(p);
  hi = static_cast<uint32_t>(p >> 32);
}

}  // namespace detail

/// One 10-round Philox4x32 block: 128 counter bits, 64 key bits -> 128 bits.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
  using namespace detail;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kPhiloxM0, ctr[0], hi0, lo0);
    mul_hi_lo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// SplitMix64 step, used to derive sub-seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic sub-seed for a named purpose (tag) under a master seed.
inline uint64_t derive_seed(uint64_t master, uint64_t purpose) {
  uint64_t s = master ^ (0xA0761D6478BD642Full * (purpose + 1));
  return splitmix64(s);
}

/// Substream identifiers. Fixed values are part of the reproducibility
/// contract: changing them changes every seeded result.
enum class Stream : uint32_t {
  kPairCells = 1,    // per-cell pair arrival counts and times
  kPairDetail = 2,   // per-pair wavelength sampling
  kDetect = 3,       // per-pair survival, routing, jitter
  kDarkCh1 = 4,      // per-cell dark counts, channel 1
  kDarkCh2 = 5,      // per-cell dark counts, channel 2
  kFranson = 6,      // per-pair interferometer outcome
  kCeNoise = 7,      // synthetic CE spectrum noise
  kTest = 100,       // scratch streams for tests
};

/// A keyed, counter-based random stream: (seed, stream, entity) selects an
/// independent sequence. Cheap to construct per entity.
class KeyedStream {
 public:
  KeyedStream(uint64_t seed, Stream stream, uint64_t entity)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        base_{static_cast<uint32_t>(stream),
              static_cast<uint32_t>(entity),
              static_cast<uint32_t>(entity >> 32)} {}

  uint32_t next_u32() {
    if (avail_ == 0) refill();
    return buf_[--avail_];
  }

  uint64_t next_u64() {
    const uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe for log().
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (second value cached).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * M_PI * uniform();
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  /// Exact Poisson sampling; product method below 10, PTRS above.
  uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return mean < 10.0 ? poisson_small(mean) : poisson_ptrs(mean);
  }

 private:
  void refill() {
    buf_ = philox4x32({block_++, base_[0], base_[1], base_[2]}, key_);
    avail_ = 4;
  }

  uint64_t poisson_small(double mean) {
    const double limit = std::exp(-mean);
    uint64_t k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }

  // Hormann's transformed rejection with squeeze (PTRS).
  uint64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + kf * loglam - std::lgamma(kf + 1.0)) {
        return static_cast<uint64_t>(kf);
      }
    }
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 3> base_;
  uint32_t block_ = 0;
  std::array<uint32_t, 4> buf_{};
  int avail_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace spdcsim
