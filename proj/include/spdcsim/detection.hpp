#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spdcsim/pair_source.hpp"

namespace spdcsim {

/// Everything between the chip facet and the time tagger, per photon:
/// path transmission, detector efficiency, dark counts and Gaussian timing
/// jitter, with a 50/50 splitter routing photons onto channels 1 and 2.
///
/// The transmission default follows the reference device's loss budget
/// (7 dB per photon, 14 dB per pair). Detector efficiency and dark rate are
/// not known for the reference device; the defaults below are calibrated so
/// the simulated CAR-vs-power curve passes near CAR ~ 1.6e3 at 8 uW, and
/// should not be read as measured hardware values.
struct DetectionChain {
  double transmission_db_per_photon = 7.0;
  double detector_efficiency = 0.85;
  double dark_count_rate_hz = 7500.0;
  double jitter_sigma_fs = 10000.0;
  /// Test hook: route signal photons to channel 1 and idlers to channel 2
  /// instead of the 50/50 splitter.
  bool deterministic_routing = false;

  void validate() const;

  /// Probability that one photon produces a click: 10^(-loss/10) * efficiency.
  double photon_survival_probability() const;

  /// Probability that an emitted pair yields a cross-channel click pair
  /// (both photons survive, opposite outputs of the 50/50 splitter).
  double pair_coincidence_probability() const;

  /// Fraction of cross-channel pairs whose time difference falls inside a
  /// centered window of total width `window_fs`, given the per-detector
  /// jitter (relative spread sigma*sqrt(2)).
  double window_capture_fraction(double window_fs) const;

  /// pair_coincidence_probability * window_capture_fraction: the end-to-end
  /// pair detection efficiency used to derive emitted rates from detected
  /// slopes.
  double pair_detection_efficiency(double window_fs) const;

  std::string describe() const;
};

/// Jitter draws are clamped to +-8 sigma so a click can never leave its
/// neighbourhood; this bounds the carry-over window needed for slab-safe
/// streaming.
inline constexpr double kJitterClampSigmas = 8.0;

struct TimeTag {
  int64_t time_fs = 0;
  uint8_t channel = 0;  // 1 or 2

  friend bool operator<(const TimeTag& a, const TimeTag& b) {
    return a.time_fs != b.time_fs ? a.time_fs < b.time_fs : a.channel < b.channel;
  }
  friend bool operator==(const TimeTag& a, const TimeTag& b) {
    return a.time_fs == b.time_fs && a.channel == b.channel;
  }
};

struct TimeTagStream {
  std::vector<TimeTag> tags;
  double duration_s = 0.0;
  uint64_t seed = 0;
  std::string chain_description;
};

/// Full detection transform: survival, routing, jitter, dark counts, merged
/// and time-sorted. Randomness is keyed per pair / per dark cell, so the
/// result is independent of how the input was chunked.
TimeTagStream detect(const std::vector<PairEvent>& pairs, const DetectionChain& chain,
                     double duration_s, uint64_t seed);

/// (channel-1 Hz, channel-2 Hz).
std::pair<double, double> singles_rates(const TimeTagStream& stream);

namespace detail {

/// Clicks from pair photons only (no darks), appended unsorted.
void detect_pairs_into(std::span<const PairEvent> pairs, const DetectionChain& chain,
                       uint64_t seed, std::vector<TimeTag>& out);

/// Dark counts on one channel for cells [cell_lo, cell_hi), clipped to the
/// stream duration, appended unsorted.
void dark_counts_into(const DetectionChain& chain, uint64_t seed, uint8_t channel,
                      int64_t cell_lo, int64_t cell_hi, int64_t duration_fs,
                      std::vector<TimeTag>& out);

}  // namespace detail

/// Raw little-endian records (u8 channel, i64 time_fs), no header.
void save_tags_binary(const std::string& path, const TimeTagStream& stream);
std::vector<TimeTag> load_tags_binary(const std::string& path);

/// CSV fallback `channel,time_fs`.
void save_tags_csv(const std::string& path, const TimeTagStream& stream);
std::vector<TimeTag> load_tags_csv(const std::string& path);

}  // namespace spdcsim
