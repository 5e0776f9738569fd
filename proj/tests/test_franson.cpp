#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spdcsim/detection.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/fit_models.hpp"
#include "spdcsim/franson.hpp"
#include "spdcsim/pipeline.hpp"
#include "spdcsim/scenario.hpp"
#include "test_support.hpp"

using namespace spdcsim;

namespace {

std::vector<PairEvent> regular_pairs(size_t n, int64_t spacing_fs) {
  std::vector<PairEvent> pairs(n);
  for (size_t i = 0; i < n; ++i) {
    pairs[i].emission_time_fs = static_cast<int64_t>(i) * spacing_fs;
    pairs[i].pair_id = i;
    pairs[i].signal_wavelength_nm = 1559.0;
    pairs[i].idler_wavelength_nm = 1561.0;
  }
  return pairs;
}

DetectionChain ideal_chain() {
  DetectionChain chain;
  chain.transmission_db_per_photon = 0.0;
  chain.detector_efficiency = 1.0;
  chain.dark_count_rate_hz = 0.0;
  chain.jitter_sigma_fs = 0.0;
  chain.deterministic_routing = true;
  return chain;
}

}  // namespace

TEST_CASE("outcome probabilities at the cardinal phases") {
  FransonConfig cfg;  // constructive by default (offset = constructive_offset)
  FransonOutcome out = outcome_probabilities(cfg);
  CHECK(out.coherence_ok);
  CHECK(out.early == doctest::Approx(1.0 / 16.0));
  CHECK(out.late == doctest::Approx(1.0 / 16.0));
  CHECK(out.central == doctest::Approx(4.0 / 16.0));
  CHECK(out.central / out.early == doctest::Approx(4.0));
  CHECK(out.early + out.late + out.central + out.dropped == 1.0);

  cfg.pump_offset_pm = cfg.constructive_offset_pm + cfg.fringe_period_pm / 2.0;
  out = outcome_probabilities(cfg);
  CHECK(out.central < 1e-15);

  cfg.pump_offset_pm = cfg.constructive_offset_pm + cfg.fringe_period_pm / 4.0;
  out = outcome_probabilities(cfg);
  CHECK(out.central / out.early == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("central peak averages twice the side peak over a period") {
  FransonConfig cfg;
  cfg.intrinsic_visibility = 0.87;
  double central_sum = 0.0, side_sum = 0.0;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    cfg.pump_offset_pm = cfg.constructive_offset_pm + cfg.fringe_period_pm * i / n;
    const FransonOutcome out = outcome_probabilities(cfg);
    central_sum += out.central;
    side_sum += out.early;
  }
  CHECK(central_sum / side_sum == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("coherence ordering gates the interference") {
  FransonConfig cfg;
  cfg.arm_delay_fs = 0;  // degenerate: no path separation
  CHECK_FALSE(cfg.coherence_ordering_ok());
  CHECK(outcome_probabilities(cfg).effective_visibility == 0.0);

  cfg = FransonConfig{};
  cfg.pump_coherence_fs = 1000.0;  // pump shorter than the delay
  CHECK_FALSE(cfg.coherence_ordering_ok());

  cfg = FransonConfig{};
  cfg.single_photon_coherence_fs = 50000.0;  // photons longer than the delay
  CHECK_FALSE(cfg.coherence_ordering_ok());

  CHECK(FransonConfig{}.coherence_ordering_ok());
}

TEST_CASE("degenerate delay collapses to a single peak") {
  FransonConfig cfg;
  cfg.arm_delay_fs = 0;
  const auto pairs = regular_pairs(4000, 10000000);
  const auto kept = transform_pairs(pairs, cfg, 5);
  CHECK(!kept.empty());
  for (const auto& ev : kept) {
    CHECK(ev.signal_delay_fs == 0);
    CHECK(ev.idler_delay_fs == 0);
  }
}

TEST_CASE("transform sampling matches the outcome distribution") {
  FransonConfig cfg;
  const FransonOutcome prob = outcome_probabilities(cfg);
  const auto pairs = regular_pairs(16000, 10000000);
  const auto kept = transform_pairs(pairs, cfg, 123);
  int64_t central = 0, early = 0, late = 0;
  for (const auto& ev : kept) {
    const int64_t d = ev.idler_delay_fs - ev.signal_delay_fs;
    if (d == 0) ++central;
    if (d > 0) ++early;
    if (d < 0) ++late;
    CHECK(ev.signal_wavelength_nm == 1559.0);  // spectral content untouched
  }
  const auto within3 = [&](int64_t n, double p) {
    const double mean = p * 16000.0;
    return std::abs(static_cast<double>(n) - mean) <= 3.0 * std::sqrt(mean * (1.0 - p));
  };
  CHECK(within3(central, prob.central));
  CHECK(within3(early, prob.early));
  CHECK(within3(late, prob.late));

  // destructive: the central outcome has probability exactly zero
  cfg.pump_offset_pm = cfg.constructive_offset_pm + cfg.fringe_period_pm / 2.0;
  const auto dark = transform_pairs(pairs, cfg, 123);
  for (const auto& ev : dark) CHECK(ev.idler_delay_fs != ev.signal_delay_fs);
}

TEST_CASE("transform is chunk-invariant") {
  FransonConfig cfg;
  const auto pairs = regular_pairs(5000, 10000000);
  const auto whole = transform_pairs(pairs, cfg, 9);
  std::vector<PairEvent> split(pairs.begin(), pairs.begin() + 1700);
  auto part1 = transform_pairs(split, cfg, 9);
  std::vector<PairEvent> rest(pairs.begin() + 1700, pairs.end());
  const auto part2 = transform_pairs(rest, cfg, 9);
  part1.insert(part1.end(), part2.begin(), part2.end());
  REQUIRE(part1.size() == whole.size());
  for (size_t i = 0; i < whole.size(); ++i) {
    CHECK(part1[i].pair_id == whole[i].pair_id);
    CHECK(part1[i].signal_delay_fs == whole[i].signal_delay_fs);
    CHECK(part1[i].idler_delay_fs == whole[i].idler_delay_fs);
  }
}

TEST_CASE("three peaks appear at minus, zero and plus the arm delay") {
  FransonConfig cfg;
  const auto pairs = regular_pairs(16000, 10000000);
  const auto kept = transform_pairs(pairs, cfg, 123);
  const TimeTagStream stream = detect(kept, ideal_chain(), 0.2, 7);
  HistogramConfig hist_cfg;
  const CoincidenceHistogram hist = correlate(stream, hist_cfg);

  // all counts sit in exactly three bins
  const int64_t k_max = hist_cfg.max_bin_index();
  const int64_t delay_bins = cfg.arm_delay_fs / hist_cfg.bin_width_fs;
  int64_t elsewhere = 0;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    const int64_t k = static_cast<int64_t>(i) - k_max;
    if (k != 0 && k != delay_bins && k != -delay_bins) elsewhere += hist.counts[i];
  }
  CHECK(elsewhere == 0);

  const FransonPeaks peaks = count_franson_peaks(hist, cfg.arm_delay_fs, 10000);
  const FransonOutcome prob = outcome_probabilities(cfg);
  CHECK(std::abs(static_cast<double>(peaks.central) - prob.central * 16000.0) <
        3.0 * std::sqrt(prob.central * 16000.0));
  CHECK(peaks.side_early + peaks.side_late + peaks.central ==
        static_cast<int64_t>(kept.size()));
}

TEST_CASE("fringe scan through the full chain") {
  const Scenario s;
  DetectionChain chain = s.chain;
  chain.jitter_sigma_fs = s.franson.analyzer_jitter_sigma_fs;
  const auto rows =
      fringe_scan(s.source, chain, s.franson.config, s.histogram, s.franson.scan_offsets_pm,
                  60.0, s.franson.pump_power_mw, s.franson.peak_halfwidth_fs, 17);
  REQUIRE(rows.size() == 12);

  // side peaks stay flat across the scan
  std::vector<double> sides;
  for (const auto& row : rows) {
    sides.push_back(row.side_early);
    sides.push_back(row.side_late);
  }
  const double side_mean = testsupport::mean_of(sides);
  for (const double v : sides) {
    CHECK(std::abs(v - side_mean) < 5.0 * std::sqrt(side_mean));
  }

  // central peak is sinusoidal in the offset
  std::vector<FringePoint> pts;
  for (const auto& row : rows) pts.push_back({row.offset_pm, row.central_counts});
  const FitResult fit = fit_fringe(pts, s.franson.config.fringe_period_pm);
  CHECK(fit.converged);
  CHECK(fit.value("visibility") > 0.9);
  std::vector<double> residuals;
  for (const auto& pt : pts) {
    const double model =
        fit.value("amplitude") *
        (1.0 + fit.value("visibility") *
                   std::cos(2.0 * M_PI * pt.offset_pm / fit.value("period_pm") +
                            fit.value("phase_rad")));
    residuals.push_back(pt.counts - model);
  }
  CHECK(std::abs(testsupport::runs_test_z(residuals)) < 1.96);

  // central averages about twice the sides over the full period
  double central_mean = 0.0;
  for (const auto& row : rows) central_mean += row.central_counts;
  central_mean /= static_cast<double>(rows.size());
  const double ratio = central_mean / side_mean;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("analytic fringe has its extremes at the configured offsets") {
  FransonConfig cfg;
  const std::vector<double> offsets = {4.05, 5.0,  6.0,  7.35, 8.0, 9.0,
                                       9.7,  10.2, 10.65, 11.0, 4.6, 6.9};
  const auto rows = fringe_scan_analytic(cfg, offsets, 16000.0);
  double max_count = -1.0, min_count = 1e18;
  double argmax = 0.0, argmin = 0.0;
  for (const auto& row : rows) {
    if (row.central_counts > max_count) {
      max_count = row.central_counts;
      argmax = row.offset_pm;
    }
    if (row.central_counts < min_count) {
      min_count = row.central_counts;
      argmin = row.offset_pm;
    }
  }
  CHECK(argmax == 7.35);
  CHECK(argmin == 10.65);
  CHECK(min_count < 1e-9);
}

TEST_CASE("textbook period from the arm delay is exposed") {
  // lambda^2/(c tau) at 779.75 nm, 30 ps
  CHECK(fringe_period_pm_from_delay(779.75, 30000) == doctest::Approx(67.603).epsilon(1e-3));
  CHECK_THROWS_AS(fringe_period_pm_from_delay(779.75, 0), DomainError);
}

TEST_CASE("franson validation") {
  FransonConfig cfg;
  cfg.intrinsic_visibility = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = FransonConfig{};
  cfg.fringe_period_pm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  HistogramConfig hist_cfg;
  CoincidenceHistogram hist;
  hist.cfg = hist_cfg;
  hist.counts.assign(static_cast<size_t>(hist_cfg.n_bins()), 0);
  CHECK_THROWS_AS(count_franson_peaks(hist, 30000, 20000), ValidationError);

  const Scenario s;
  const std::vector<double> narrow = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fringe_scan(s.source, s.chain, s.franson.config, s.histogram, narrow, 1.0,
                              0.036, 10000, 1),
                  ValidationError);
}

TEST_CASE("pump coherence must exceed the arm delay in a pipeline") {
  const Scenario s;
  PipelineRun run;
  run.source = s.source;
  run.source.pump_coherence_time_s = 1e-12;  // 1 ps, shorter than 30 ps delay
  run.chain = s.chain;
  run.emitted_rate_hz = 1000.0;
  run.duration_s = 0.1;
  run.master_seed = 1;
  run.franson = s.franson.config;
  CHECK_THROWS_AS(run_collect_pipeline(run), ValidationError);
}
