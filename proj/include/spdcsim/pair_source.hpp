#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spdcsim {

enum class SpectralShape { kGaussian, kSinc2 };

/// SPDC source description. `pcr_slope_hz_per_mw` is the *detected* pair
/// coincidence rate per mW of coupled pump after the reference detection
/// chain; the emitted (on-chip) rate is derived from it via the chain's pair
/// detection efficiency so that simulated observables match at the detectors,
/// not at the chip.
struct SourceSpec {
  double pcr_slope_hz_per_mw = 580.0;
  double center_wavelength_nm = 1560.0;
  double bandwidth_fwhm_nm = 30.0;
  double pump_wavelength_nm = 780.0;
  double pump_coherence_time_s = 1e-5;
  SpectralShape spectral_shape = SpectralShape::kGaussian;

  void validate() const;
};

/// One emitted pair. Wavelengths satisfy energy conservation
/// 1/signal + 1/idler = 1/pump. The per-photon delay fields are zero at
/// emission and populated by the Franson analyzer transform.
struct PairEvent {
  int64_t emission_time_fs = 0;
  double signal_wavelength_nm = 0.0;
  double idler_wavelength_nm = 0.0;
  uint64_t pair_id = 0;
  int64_t signal_delay_fs = 0;
  int64_t idler_delay_fs = 0;
};

/// Fixed time quantum for splittable event generation. Arrivals are drawn
/// per cell (Poisson count + uniform order statistics), which realizes an
/// exact homogeneous Poisson process while keeping every cell independently
/// addressable by the counter-based RNG.
inline constexpr int64_t kCellFs = 1000000000000;  // 1 ms

/// Emitted pair rate that reproduces `pcr_slope * power` at the detectors,
/// given the chain's pair detection efficiency (see
/// DetectionChain::pair_detection_efficiency).
double emitted_pair_rate_hz(const SourceSpec& spec, double pump_power_mw,
                            double pair_detection_efficiency);

/// Incremental cell-by-cell pair generation (bounded memory for long runs).
/// With `sample_wavelengths` off the pair carries the degenerate wavelengths
/// (2 * pump for both photons, energy conserving); per-pair spectral sampling
/// lives on its own keyed substream, so skipping it leaves every other draw
/// untouched. The tag pipelines use this: no detector observable depends on
/// the sampled wavelengths.
class PairGenerator {
 public:
  PairGenerator(const SourceSpec& spec, double emitted_rate_hz, double duration_s,
                uint64_t seed, bool sample_wavelengths = true);

  /// Appends the next cell's pairs (time-sorted) to `out`. Returns false once
  /// the full duration has been generated.
  bool next_cell(std::vector<PairEvent>& out);

  int64_t duration_fs() const { return duration_fs_; }
  int64_t next_cell_start_fs() const { return cell_index_ * kCellFs; }
  uint64_t pairs_emitted() const { return next_pair_id_; }

 private:
  SourceSpec spec_;
  double rate_hz_;
  int64_t duration_fs_;
  uint64_t seed_;
  bool sample_wavelengths_;
  int64_t cell_index_ = 0;
  uint64_t next_pair_id_ = 0;
};

/// Whole-stream convenience wrapper around PairGenerator.
std::vector<PairEvent> generate_pairs(const SourceSpec& spec, double pump_power_mw,
                                      double duration_s, uint64_t seed,
                                      double pair_detection_efficiency);

/// Loss-corrected source brightness in pairs/s/mW/MHz:
/// detected_pcr * 10^(loss_db/10) / (power * bandwidth).
double internal_brightness(double detected_pcr_hz, double power_mw, double bandwidth_mhz,
                           double loss_db);

}  // namespace spdcsim
