#include "spdcsim/pair_source.hpp"

#include <algorithm>
#include <cmath>

#include "spdcsim/errors.hpp"
#include "spdcsim/fit_models.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void SourceSpec::validate() const {
  if (!(pcr_slope_hz_per_mw >= 0.0)) throw ValidationError("PCR slope must be >= 0");
  if (!(bandwidth_fwhm_nm > 0.0)) throw ValidationError("bandwidth must be positive");
  if (!(center_wavelength_nm > pump_wavelength_nm && pump_wavelength_nm > 0.0)) {
    throw ValidationError("need 0 < pump wavelength < center wavelength");
  }
  if (!(pump_coherence_time_s > 0.0)) throw ValidationError("pump coherence must be positive");
}

double emitted_pair_rate_hz(const SourceSpec& spec, double pump_power_mw,
                            double pair_detection_efficiency) {
  spec.validate();
  if (!(pump_power_mw >= 0.0)) throw DomainError("pump power must be >= 0");
  if (!(pair_detection_efficiency > 0.0 && pair_detection_efficiency <= 1.0)) {
    throw DomainError("pair detection efficiency must be in (0, 1]");
  }
  return spec.pcr_slope_hz_per_mw * pump_power_mw / pair_detection_efficiency;
}

namespace {

// Idler wavelength forced by energy conservation given pump and signal.
double idler_for(double pump_nm, double signal_nm) {
  return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
}

double sample_signal_wavelength(const SourceSpec& spec, KeyedStream& rng) {
  if (spec.spectral_shape == SpectralShape::kGaussian) {
    const double sigma = fwhm_to_sigma(spec.bandwidth_fwhm_nm);
    for (;;) {
      const double lam = spec.center_wavelength_nm + sigma * rng.gaussian();
      if (lam > spec.pump_wavelength_nm) return lam;
    }
  }
  // sinc^2 spectral density, same FWHM, truncated at +-8 FWHM.
  const double k = 2.0 * sinc2_half_max_x() / spec.bandwidth_fwhm_nm;
  const double half_range = 8.0 * spec.bandwidth_fwhm_nm;
  for (;;) {
    const double x = (2.0 * rng.uniform() - 1.0) * half_range;
    if (rng.uniform() < qpm_sinc2(k * x)) {
      const double lam = spec.center_wavelength_nm + x;
      if (lam > spec.pump_wavelength_nm) return lam;
    }
  }
}

}  // namespace

PairGenerator::PairGenerator(const SourceSpec& spec, double emitted_rate_hz, double duration_s,
                             uint64_t seed, bool sample_wavelengths)
    : spec_(spec), rate_hz_(emitted_rate_hz), seed_(seed),
      sample_wavelengths_(sample_wavelengths) {
  spec_.validate();
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  if (!(emitted_rate_hz >= 0.0)) throw DomainError("emitted rate must be >= 0");
  duration_fs_ = static_cast<int64_t>(std::llround(duration_s * kFsPerSecond));
}

bool PairGenerator::next_cell(std::vector<PairEvent>& out) {
  const int64_t start = cell_index_ * kCellFs;
  if (start >= duration_fs_) return false;
  const int64_t end = std::min(start + kCellFs, duration_fs_);
  const int64_t span = end - start;

  KeyedStream cell_rng(seed_, Stream::kPairCells, static_cast<uint64_t>(cell_index_));
  const uint64_t count = cell_rng.poisson(rate_hz_ * fs_to_s(static_cast<double>(span)));

  // Uniform order statistics within the cell = homogeneous Poisson arrivals.
  std::vector<int64_t> times(count);
  for (auto& t : times) {
    t = start + static_cast<int64_t>(cell_rng.uniform() * static_cast<double>(span));
  }
  std::sort(times.begin(), times.end());

  for (const int64_t t : times) {
    PairEvent ev;
    ev.emission_time_fs = t;
    ev.pair_id = next_pair_id_++;
    if (sample_wavelengths_) {
      KeyedStream pair_rng(seed_, Stream::kPairDetail, ev.pair_id);
      ev.signal_wavelength_nm = sample_signal_wavelength(spec_, pair_rng);
      ev.idler_wavelength_nm = idler_for(spec_.pump_wavelength_nm, ev.signal_wavelength_nm);
    } else {
      ev.signal_wavelength_nm = 2.0 * spec_.pump_wavelength_nm;
      ev.idler_wavelength_nm = 2.0 * spec_.pump_wavelength_nm;
    }
    out.push_back(ev);
  }
  ++cell_index_;
  return true;
}

std::vector<PairEvent> generate_pairs(const SourceSpec& spec, double pump_power_mw,
                                      double duration_s, uint64_t seed,
                                      double pair_detection_efficiency) {
  const double rate = emitted_pair_rate_hz(spec, pump_power_mw, pair_detection_efficiency);
  PairGenerator gen(spec, rate, duration_s, seed);
  std::vector<PairEvent> pairs;
  while (gen.next_cell(pairs)) {
  }
  return pairs;
}

double internal_brightness(double detected_pcr_hz, double power_mw, double bandwidth_mhz,
                           double loss_db) {
  if (!(detected_pcr_hz > 0.0 && power_mw > 0.0 && bandwidth_mhz > 0.0 && loss_db >= 0.0)) {
    throw DomainError("brightness inputs must be positive (loss >= 0)");
  }
  return detected_pcr_hz * std::pow(10.0, loss_db / 10.0) / (power_mw * bandwidth_mhz);
}

}  // namespace spdcsim
