#pragma once

#include <string>
#include <vector>

#include "spdcsim/coincidence.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/franson_config.hpp"
#include "spdcsim/pair_source.hpp"

namespace spdcsim {

/// Per-pair outcome probabilities of the folded Franson analyzer. Each photon
/// reaches the output with amplitude 1/2 per arm; the |SS> and |LL> paths are
/// indistinguishable and interfere in the central peak:
///   P(early) = P(late) = 1/16,
///   P(central) = (2 + 2 V cos(phase)) / 16,
/// the remainder of the pairs is lost to post-selection.
struct FransonOutcome {
  double early = 0.0;
  double central = 0.0;
  double late = 0.0;
  double dropped = 0.0;
  bool coherence_ok = true;
  double effective_visibility = 0.0;
};

FransonOutcome outcome_probabilities(const FransonConfig& cfg);

/// Monte Carlo analyzer transform: samples an outcome per pair, assigns the
/// corresponding per-photon path delays (0 or arm_delay) and drops
/// non-post-selected pairs. Keyed per pair_id, so slab partitioning does not
/// change results.
std::vector<PairEvent> transform_pairs(const std::vector<PairEvent>& pairs,
                                       const FransonConfig& cfg, uint64_t seed);

/// Counts in the three analyzer windows of a coincidence histogram
/// (centers -arm_delay, 0, +arm_delay; each window is 2*halfwidth wide).
struct FransonPeaks {
  int64_t side_early = 0;  // delay -arm_delay
  int64_t central = 0;
  int64_t side_late = 0;  // delay +arm_delay
};

FransonPeaks count_franson_peaks(const CoincidenceHistogram& hist, int64_t arm_delay_fs,
                                 int64_t peak_halfwidth_fs);

struct FringeScanRow {
  double offset_pm = 0.0;
  double central_counts = 0.0;
  double side_early = 0.0;
  double side_late = 0.0;
};

/// Scans the pump offset and records the three peak populations per offset.
/// Each offset runs the full generate -> analyzer -> detect -> correlate
/// pipeline for `duration_s` at `pump_power_mw`.
std::vector<FringeScanRow> fringe_scan(const SourceSpec& source, const DetectionChain& chain,
                                       const FransonConfig& cfg, const HistogramConfig& hist,
                                       const std::vector<double>& offsets_pm, double duration_s,
                                       double pump_power_mw, int64_t peak_halfwidth_fs,
                                       uint64_t seed);

/// Analytic fringe (no Monte Carlo): expected central-peak counts per offset
/// for a given exposure, useful as an oracle and for noiseless fits.
std::vector<FringeScanRow> fringe_scan_analytic(const FransonConfig& cfg,
                                                const std::vector<double>& offsets_pm,
                                                double pairs_per_offset);

void save_fringe_csv(const std::string& path, const std::vector<FringeScanRow>& rows);

}  // namespace spdcsim
