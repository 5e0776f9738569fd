#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdcsim/coincidence.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/franson_config.hpp"
#include "spdcsim/pair_source.hpp"
#include "spdcsim/qpm.hpp"

namespace spdcsim {

/// SHG spectrum generation/fit settings.
struct ShgSection {
  double grid_center_nm = 1561.0;
  double grid_span_nm = 0.7;  // full width of the sampled window
  int grid_points = 701;
  double noise_sigma_rel = 0.02;  // absolute sigma = rel * peak CE; 0 = noiseless
};

/// CAR-vs-power scan settings. The default powers sit where pair singles
/// dominate dark counts, which is the regime with the inverse CAR-PCR trend;
/// see README for the calibration notes.
struct CarScanSection {
  std::vector<double> powers_mw = {20.0, 40.0, 80.0, 160.0, 320.0, 640.0};
  std::vector<double> durations_s = {30.0, 15.0, 8.0, 4.0, 2.0, 1.0};
};

/// Detected-PCR linearity scan settings.
struct PcrScanSection {
  std::vector<double> powers_mw = {0.02, 0.065, 0.11, 0.155, 0.2};
  double duration_s = 40.0;
};

/// Franson analyzer scan/histogram settings beyond FransonConfig itself.
struct FransonSection {
  FransonConfig config;
  /// Analyzer runs use this timing jitter instead of the chain default; the
  /// three peaks (30 ps apart) are unresolvable at 10 ps per-detector jitter.
  double analyzer_jitter_sigma_fs = 2000.0;
  int64_t peak_halfwidth_fs = 10000;
  std::vector<double> scan_offsets_pm = {4.05, 4.65, 5.25, 5.85, 6.45,  7.05,
                                         7.65, 8.25, 8.85, 9.45, 10.05, 10.65};
  double scan_duration_s = 190.0;
  double histogram_duration_s = 190.0;
  double pump_power_mw = 0.036;
  double destructive_offset_pm = 10.65;
};

struct PairsSection {
  double pump_power_mw = 0.036;
  double duration_s = 10.0;
};

/// One scenario file drives one reproducible run of any subcommand.
struct Scenario {
  int schema_version = 1;
  uint64_t seed = 20250901;
  SourceSpec source;
  DetectionChain chain;
  HistogramConfig histogram;
  FransonSection franson;
  GratingParams grating;
  ModeAreas areas;
  ShgSection shg;
  CarScanSection car_scan;
  PcrScanSection pcr_scan;
  PairsSection pairs;
  double correlate_duration_s = 10.0;

  void validate() const;
};

/// Strict parse: unknown keys, wrong types and unsupported schema versions
/// are rejected. Absent keys take defaults.
Scenario parse_scenario_json(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Serialization always writes every field (defaults made explicit).
std::string scenario_to_json(const Scenario& s);
void save_scenario(const std::string& path, const Scenario& s);

}  // namespace spdcsim
