#include "spdcsim/franson.hpp"

#include <cmath>

#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/pipeline.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void FransonConfig::validate() const {
  if (!(arm_delay_fs >= 0)) throw ValidationError("arm delay must be >= 0");
  if (!(fringe_period_pm > 0.0)) throw ValidationError("fringe period must be positive");
  if (!(intrinsic_visibility >= 0.0 && intrinsic_visibility <= 1.0)) {
    throw ValidationError("intrinsic visibility must be in [0, 1]");
  }
  if (!(single_photon_coherence_fs > 0.0 && pump_coherence_fs > 0.0)) {
    throw ValidationError("coherence times must be positive");
  }
}

bool FransonConfig::coherence_ordering_ok() const {
  return single_photon_coherence_fs < static_cast<double>(arm_delay_fs) &&
         static_cast<double>(arm_delay_fs) < pump_coherence_fs;
}

double FransonConfig::phase() const {
  return 2.0 * M_PI * (pump_offset_pm - constructive_offset_pm) / fringe_period_pm;
}

double FransonConfig::effective_visibility() const {
  return coherence_ordering_ok() ? intrinsic_visibility : 0.0;
}

double fringe_period_pm_from_delay(double pump_reference_nm, int64_t arm_delay_fs) {
  if (!(arm_delay_fs > 0)) throw DomainError("arm delay must be positive");
  const double lam = nm_to_m(pump_reference_nm);
  const double tau = fs_to_s(static_cast<double>(arm_delay_fs));
  return lam * lam / (kSpeedOfLight * tau) * 1e12;  // meters -> pm
}

FransonOutcome outcome_probabilities(const FransonConfig& cfg) {
  cfg.validate();
  FransonOutcome out;
  out.coherence_ok = cfg.coherence_ordering_ok();
  out.effective_visibility = cfg.effective_visibility();
  out.early = 1.0 / 16.0;
  out.late = 1.0 / 16.0;
  out.central = (2.0 + 2.0 * out.effective_visibility * std::cos(cfg.phase())) / 16.0;
  out.dropped = 1.0 - out.early - out.late - out.central;
  return out;
}

std::vector<PairEvent> transform_pairs(const std::vector<PairEvent>& pairs,
                                       const FransonConfig& cfg, uint64_t seed) {
  const FransonOutcome prob = outcome_probabilities(cfg);
  const double t_early = prob.early;
  const double t_late = t_early + prob.late;
  const double t_central = t_late + prob.central;
  const int64_t delay = cfg.arm_delay_fs;

  std::vector<PairEvent> out;
  out.reserve(static_cast<size_t>(static_cast<double>(pairs.size()) * (t_central + 0.01)) + 16);
  for (const PairEvent& ev : pairs) {
    KeyedStream rng(seed, Stream::kFranson, ev.pair_id);
    const double u = rng.uniform();
    if (u >= t_central) continue;  // post-selection loss
    PairEvent kept = ev;
    if (u < t_early) {
      kept.signal_delay_fs = 0;  // |SL>: signal short, idler long
      kept.idler_delay_fs = delay;
    } else if (u < t_late) {
      kept.signal_delay_fs = delay;  // |LS>
      kept.idler_delay_fs = 0;
    } else {
      // |SS> and |LL> are indistinguishable; both leave the pair's relative
      // delay at zero, only the common delay differs.
      const int64_t common = rng.uniform() < 0.5 ? 0 : delay;
      kept.signal_delay_fs = common;
      kept.idler_delay_fs = common;
    }
    out.push_back(kept);
  }
  return out;
}

FransonPeaks count_franson_peaks(const CoincidenceHistogram& hist, int64_t arm_delay_fs,
                                 int64_t peak_halfwidth_fs) {
  if (!(peak_halfwidth_fs >= 0)) throw DomainError("peak halfwidth must be >= 0");
  if (arm_delay_fs > 0 && 2 * peak_halfwidth_fs >= arm_delay_fs) {
    throw ValidationError("analyzer windows overlap: halfwidth too large for the arm delay");
  }
  FransonPeaks peaks;
  peaks.side_early = hist.counts_within(-arm_delay_fs, peak_halfwidth_fs);
  peaks.central = hist.counts_within(0, peak_halfwidth_fs);
  peaks.side_late = hist.counts_within(arm_delay_fs, peak_halfwidth_fs);
  return peaks;
}

std::vector<FringeScanRow> fringe_scan(const SourceSpec& source, const DetectionChain& chain,
                                       const FransonConfig& cfg, const HistogramConfig& hist,
                                       const std::vector<double>& offsets_pm, double duration_s,
                                       double pump_power_mw, int64_t peak_halfwidth_fs,
                                       uint64_t seed) {
  cfg.validate();
  if (offsets_pm.size() < 2) throw DomainError("fringe scan needs at least two offsets");
  double lo = offsets_pm[0], hi = offsets_pm[0];
  for (const double o : offsets_pm) {
    lo = std::min(lo, o);
    hi = std::max(hi, o);
  }
  if (hi - lo < cfg.fringe_period_pm) {
    throw ValidationError("fringe scan offsets must span at least one fringe period");
  }

  const double pair_eff =
      chain.pair_detection_efficiency(static_cast<double>(hist.coincidence_window_fs));
  std::vector<FringeScanRow> rows;
  rows.reserve(offsets_pm.size());
  for (size_t i = 0; i < offsets_pm.size(); ++i) {
    FransonConfig point_cfg = cfg;
    point_cfg.pump_offset_pm = offsets_pm[i];

    PipelineRun run;
    run.source = source;
    run.chain = chain;
    run.emitted_rate_hz = emitted_pair_rate_hz(source, pump_power_mw, pair_eff);
    run.duration_s = duration_s;
    run.master_seed = derive_seed(seed, 0xF51A6E00u + i);
    run.franson = point_cfg;

    const CoincidenceHistogram h = run_coincidence_pipeline(run, hist);
    const FransonPeaks peaks = count_franson_peaks(h, cfg.arm_delay_fs, peak_halfwidth_fs);
    rows.push_back(FringeScanRow{offsets_pm[i], static_cast<double>(peaks.central),
                                 static_cast<double>(peaks.side_early),
                                 static_cast<double>(peaks.side_late)});
  }
  return rows;
}

std::vector<FringeScanRow> fringe_scan_analytic(const FransonConfig& cfg,
                                                const std::vector<double>& offsets_pm,
                                                double pairs_per_offset) {
  if (!(pairs_per_offset > 0.0)) throw DomainError("pairs per offset must be positive");
  std::vector<FringeScanRow> rows;
  rows.reserve(offsets_pm.size());
  for (const double offset : offsets_pm) {
    FransonConfig point_cfg = cfg;
    point_cfg.pump_offset_pm = offset;
    const FransonOutcome prob = outcome_probabilities(point_cfg);
    rows.push_back(FringeScanRow{offset, pairs_per_offset * prob.central,
                                 pairs_per_offset * prob.early, pairs_per_offset * prob.late});
  }
  return rows;
}

void save_fringe_csv(const std::string& path, const std::vector<FringeScanRow>& rows) {
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const FringeScanRow& r : rows) {
    data.push_back({r.offset_pm, r.central_counts, r.side_early, r.side_late});
  }
  write_csv(path, {"offset_pm", "central_counts", "side_early", "side_late"}, data);
}

}  // namespace spdcsim
