#include "spdcsim/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "json.hpp"
#include "spdcsim/csvio.hpp"
#include "spdcsim/dispersion.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/fit_models.hpp"
#include "spdcsim/franson.hpp"
#include "spdcsim/pipeline.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

namespace {

namespace fs = std::filesystem;

std::string out_path(const CommandOptions& options, const std::string& name) {
  fs::create_directories(options.out_dir);
  return (fs::path(options.out_dir) / name).string();
}

void write_scenario_used(const Scenario& scenario, const CommandOptions& options) {
  save_scenario(out_path(options, "scenario_used.json"), scenario);
}

Eigen::VectorXd shg_grid(const ShgSection& shg) {
  return Eigen::VectorXd::LinSpaced(shg.grid_points, shg.grid_center_nm - shg.grid_span_nm / 2.0,
                                    shg.grid_center_nm + shg.grid_span_nm / 2.0);
}

DetectionChain analyzer_chain(const Scenario& scenario) {
  DetectionChain chain = scenario.chain;
  chain.jitter_sigma_fs = scenario.franson.analyzer_jitter_sigma_fs;
  return chain;
}

int fit_exit_code(const FitResult& fit) { return fit.converged ? 0 : 1; }

}  // namespace

int cmd_shg(const Scenario& scenario, const CommandOptions& options,
            const std::optional<std::string>& input_csv) {
  write_scenario_used(scenario, options);
  const DispersionModel disp = DispersionModel::default_model();

  CESpectrum spec;
  if (input_csv) {
    spec = load_ce_csv(*input_csv);
  } else {
    const Eigen::VectorXd grid = shg_grid(scenario.shg);
    double sigma = 0.0;
    if (scenario.shg.noise_sigma_rel > 0.0) {
      const double peak = conversion_efficiency_peak(disp, scenario.grating, scenario.areas,
                                                     scenario.shg.grid_center_nm);
      sigma = scenario.shg.noise_sigma_rel * peak;
    }
    spec = ce_spectrum(disp, scenario.grating, scenario.areas, grid, sigma,
                       derive_seed(scenario.seed, 0x534847));
  }
  save_ce_csv(out_path(options, "ce_spectrum.csv"), spec);

  const FitResult fit = fit_ce_spectrum(spec, disp, scenario.areas, scenario.grating);
  write_text_file(out_path(options, "shg_fit.json"), fit.to_json());
  std::cout << "shg: wrote ce_spectrum.csv, shg_fit.json (converged="
            << (fit.converged ? "yes" : "no") << ")\n";
  return fit_exit_code(fit);
}

int cmd_fit_ce(const Scenario& scenario, const CommandOptions& options,
               const std::string& input_csv) {
  write_scenario_used(scenario, options);
  const DispersionModel disp = DispersionModel::default_model();
  const CESpectrum spec = load_ce_csv(input_csv);
  const FitResult fit = fit_ce_spectrum(spec, disp, scenario.areas, scenario.grating);
  write_text_file(out_path(options, "ce_fit.json"), fit.to_json());
  std::cout << "fit-ce: wrote ce_fit.json (converged=" << (fit.converged ? "yes" : "no") << ")\n";
  return fit_exit_code(fit);
}

int cmd_pairs(const Scenario& scenario, const CommandOptions& options) {
  write_scenario_used(scenario, options);
  PipelineRun run;
  run.source = scenario.source;
  run.chain = scenario.chain;
  run.emitted_rate_hz = emitted_pair_rate_hz(
      scenario.source, scenario.pairs.pump_power_mw,
      scenario.chain.pair_detection_efficiency(
          static_cast<double>(scenario.histogram.coincidence_window_fs)));
  run.duration_s = scenario.pairs.duration_s;
  run.master_seed = scenario.seed;

  const TimeTagStream stream = run_collect_pipeline(run);
  save_tags_binary(out_path(options, "tags.bin"), stream);
  if (options.format == "csv") {
    save_tags_csv(out_path(options, "tags.csv"), stream);
  }
  std::cout << "pairs: " << stream.tags.size() << " tags over "
            << format_double(stream.duration_s) << " s\n";
  return 0;
}

int cmd_correlate(const Scenario& scenario, const CommandOptions& options,
                  const std::string& tag_file) {
  write_scenario_used(scenario, options);
  TimeTagStream stream;
  if (tag_file.size() >= 4 && tag_file.substr(tag_file.size() - 4) == ".csv") {
    stream.tags = load_tags_csv(tag_file);
  } else {
    stream.tags = load_tags_binary(tag_file);
  }
  stream.duration_s = scenario.correlate_duration_s;

  const CoincidenceHistogram hist = correlate(stream, scenario.histogram);
  save_histogram_csv(out_path(options, "histogram.csv"), hist);
  const CarResult analysis = car_pcr(hist);
  write_text_file(out_path(options, "coincidence_summary.json"), analysis.to_json());
  std::cout << "correlate: C_C=" << format_double(analysis.c_c)
            << " CAR=" << format_double(analysis.car) << (analysis.lower_bound ? " (>=)" : "")
            << " PCR=" << format_double(analysis.pcr_hz) << " Hz\n";
  return 0;
}

int cmd_car_scan(const Scenario& scenario, const CommandOptions& options) {
  write_scenario_used(scenario, options);
  const std::vector<ScanRow> rows =
      car_scan(scenario.source, scenario.chain, scenario.histogram, scenario.car_scan.powers_mw,
               scenario.car_scan.durations_s, scenario.seed);
  save_scan_csv(out_path(options, "car_scan.csv"), rows);

  std::vector<CarPoint> points;
  for (const ScanRow& r : rows) {
    if (!r.lower_bound && r.car > 0.0 && r.pcr_hz > 0.0) {
      points.push_back(CarPoint{r.pcr_hz, r.car});
    }
  }
  if (points.size() < 4) {
    std::cerr << "car-scan: too few finite CAR points for the inverse-law fit\n";
    return 1;
  }
  const FitResult fit = fit_inverse_law(points);
  write_text_file(out_path(options, "car_fit.json"), fit.to_json());
  std::cout << "car-scan: exponent=" << format_double(fit.value("exponent")) << " +- "
            << format_double(fit.stderr_of("exponent")) << "\n";
  return fit_exit_code(fit);
}

int cmd_franson(const Scenario& scenario, const CommandOptions& options) {
  write_scenario_used(scenario, options);
  const DetectionChain chain = analyzer_chain(scenario);
  const double pair_eff = chain.pair_detection_efficiency(
      static_cast<double>(scenario.histogram.coincidence_window_fs));

  const auto histogram_at = [&](double offset_pm) {
    FransonConfig cfg = scenario.franson.config;
    cfg.pump_offset_pm = offset_pm;
    PipelineRun run;
    run.source = scenario.source;
    run.chain = chain;
    run.emitted_rate_hz =
        emitted_pair_rate_hz(scenario.source, scenario.franson.pump_power_mw, pair_eff);
    run.duration_s = scenario.franson.histogram_duration_s;
    run.master_seed = derive_seed(scenario.seed, 0xF4A2);
    run.franson = cfg;
    return run_coincidence_pipeline(run, scenario.histogram);
  };

  save_histogram_csv(out_path(options, "franson_constructive.csv"),
                     histogram_at(scenario.franson.config.constructive_offset_pm));
  save_histogram_csv(out_path(options, "franson_destructive.csv"),
                     histogram_at(scenario.franson.destructive_offset_pm));

  const std::vector<FringeScanRow> rows = fringe_scan(
      scenario.source, chain, scenario.franson.config, scenario.histogram,
      scenario.franson.scan_offsets_pm, scenario.franson.scan_duration_s,
      scenario.franson.pump_power_mw, scenario.franson.peak_halfwidth_fs, scenario.seed);
  save_fringe_csv(out_path(options, "fringe.csv"), rows);

  std::vector<FringePoint> points;
  for (const FringeScanRow& r : rows) points.push_back({r.offset_pm, r.central_counts});
  const FitResult fit = fit_fringe(points, scenario.franson.config.fringe_period_pm);

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(fit.to_json());
  j["bell_visibility_threshold"] = kBellVisibilityThreshold;
  j["violates_bell_bound"] = fit.value("visibility") > kBellVisibilityThreshold;
  write_text_file(out_path(options, "visibility.json"), j.dump(2) + "\n");

  std::cout << "franson: V=" << format_double(fit.value("visibility")) << " +- "
            << format_double(fit.stderr_of("visibility")) << "\n";
  return fit_exit_code(fit);
}

int cmd_fringe_fit(const Scenario& scenario, const CommandOptions& options,
                   const std::string& fringe_csv) {
  write_scenario_used(scenario, options);
  const CsvTable t = read_csv(fringe_csv, {"offset_pm", "central_counts"});
  std::vector<FringePoint> points;
  for (const auto& row : t.rows) points.push_back({row[0], row[1]});
  const FitResult fit = fit_fringe(points, scenario.franson.config.fringe_period_pm);

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(fit.to_json());
  j["bell_visibility_threshold"] = kBellVisibilityThreshold;
  j["violates_bell_bound"] = fit.value("visibility") > kBellVisibilityThreshold;
  write_text_file(out_path(options, "visibility.json"), j.dump(2) + "\n");
  std::cout << "fringe-fit: V=" << format_double(fit.value("visibility")) << " +- "
            << format_double(fit.stderr_of("visibility")) << "\n";
  return fit_exit_code(fit);
}

namespace {

struct SelfTest {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  }
};

}  // namespace

int cmd_selftest(const Scenario& scenario, const CommandOptions& options) {
  (void)options;
  SelfTest t;
  const DispersionModel disp = DispersionModel::default_model();

  // Counter RNG reference block.
  {
    const auto block = philox4x32({0, 0, 0, 0}, {0, 0});
    t.check("rng reference block",
            block == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  }

  // QPM identities.
  {
    const double dk = delta_k(disp, 1561.0, 3.14e-6);
    t.check("phase matching at design point", std::abs(dk) < 1e-6,
            "delta_k=" + format_double(dk));
    const double period = qpm_period_for(disp, 1561.0);
    const double rt = delta_k(disp, 1561.0, period);
    t.check("period/delta_k round trip", std::abs(rt) < 1e-9, "residual=" + format_double(rt));
    t.check("sinc2 null at pi", qpm_sinc2(M_PI) < 1e-30);
  }

  // Brightness identity.
  t.check("brightness identity", internal_brightness(1.0, 1.0, 1.0, 0.0) == 1.0);

  // Streaming correlator vs quadratic reference.
  {
    bool ok = true;
    for (uint64_t seed = 1; seed <= 2 && ok; ++seed) {
      KeyedStream rng(seed, Stream::kTest, 7);
      std::vector<TimeTag> tags;
      int64_t time = 0;
      for (int i = 0; i < 500; ++i) {
        time += static_cast<int64_t>(rng.uniform() * 2e5);
        tags.push_back(TimeTag{time, static_cast<uint8_t>(rng.uniform() < 0.5 ? 1 : 2)});
      }
      TimeTagStream stream;
      stream.tags = tags;
      stream.duration_s = 1.0;
      const CoincidenceHistogram fast = correlate(stream, scenario.histogram);

      std::vector<int64_t> slow(fast.counts.size(), 0);
      const int64_t bw = scenario.histogram.bin_width_fs;
      const int64_t k_max = scenario.histogram.max_bin_index();
      for (const TimeTag& a : tags) {
        if (a.channel != 1) continue;
        for (const TimeTag& b : tags) {
          if (b.channel != 2) continue;
          const int64_t delta = b.time_fs - a.time_fs;
          if (std::llabs(delta) > scenario.histogram.span_fs) continue;
          const int64_t shifted = 2 * delta + bw;
          const int64_t bin = shifted >= 0 ? shifted / (2 * bw)
                                           : -((-shifted + 2 * bw - 1) / (2 * bw));
          slow[static_cast<size_t>(bin + k_max)]++;
        }
      }
      ok = fast.counts == slow;
    }
    t.check("correlator matches quadratic reference", ok);
  }

  // Detection probability vs closed form.
  {
    std::vector<PairEvent> pairs(200000);
    for (size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].emission_time_fs = static_cast<int64_t>(i) * 1000000;
      pairs[i].pair_id = i;
      pairs[i].signal_wavelength_nm = 1560.0;
      pairs[i].idler_wavelength_nm = 1560.0;
    }
    DetectionChain chain = scenario.chain;
    chain.dark_count_rate_hz = 0.0;
    chain.jitter_sigma_fs = 0.0;
    const TimeTagStream stream = detect(pairs, chain, 200.0, 99);
    int64_t coincidences = 0;
    for (size_t i = 1; i < stream.tags.size(); ++i) {
      if (stream.tags[i].time_fs == stream.tags[i - 1].time_fs &&
          stream.tags[i].channel != stream.tags[i - 1].channel) {
        ++coincidences;
      }
    }
    const double expected = chain.pair_coincidence_probability() * static_cast<double>(pairs.size());
    const double rel = std::abs(static_cast<double>(coincidences) - expected) / expected;
    t.check("pair detection probability", rel < 0.02, "rel err=" + format_double(rel));
  }

  // Franson outcome probabilities vs a 16k-pair Monte Carlo run.
  {
    FransonConfig cfg = scenario.franson.config;
    cfg.pump_offset_pm = cfg.constructive_offset_pm;
    const FransonOutcome prob = outcome_probabilities(cfg);
    std::vector<PairEvent> pairs(16000);
    for (size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].emission_time_fs = static_cast<int64_t>(i) * 10000000;
      pairs[i].pair_id = i;
    }
    const std::vector<PairEvent> kept = transform_pairs(pairs, cfg, 123);
    int64_t central = 0, early = 0, late = 0;
    for (const PairEvent& ev : kept) {
      const int64_t d = ev.idler_delay_fs - ev.signal_delay_fs;
      if (d == 0) ++central;
      if (d > 0) ++early;
      if (d < 0) ++late;
    }
    const auto within3 = [&](double n, double p) {
      const double mean = p * 16000.0;
      return std::abs(n - mean) <= 3.0 * std::sqrt(mean * (1.0 - p));
    };
    t.check("franson outcome sampling",
            within3(static_cast<double>(central), prob.central) &&
                within3(static_cast<double>(early), prob.early) &&
                within3(static_cast<double>(late), prob.late));

    cfg.pump_offset_pm = cfg.constructive_offset_pm + cfg.fringe_period_pm / 2.0;
    const std::vector<PairEvent> dark_fringe = transform_pairs(pairs, cfg, 123);
    int64_t central_dark = 0;
    for (const PairEvent& ev : dark_fringe) {
      if (ev.idler_delay_fs == ev.signal_delay_fs) ++central_dark;
    }
    t.check("destructive interference empties the central peak", central_dark == 0);
  }

  // Noiseless fringe fit.
  {
    FransonConfig cfg = scenario.franson.config;
    const std::vector<FringeScanRow> rows =
        fringe_scan_analytic(cfg, scenario.franson.scan_offsets_pm, 16000.0);
    std::vector<FringePoint> pts;
    for (const auto& r : rows) pts.push_back({r.offset_pm, r.central_counts});
    const FitResult fit = fit_fringe(pts, cfg.fringe_period_pm);
    t.check("analytic fringe visibility", std::abs(fit.value("visibility") - 1.0) < 1e-9,
            "V=" + format_double(fit.value("visibility")));
  }

  // Chunked pipeline independence + determinism.
  {
    PipelineRun run;
    run.source = scenario.source;
    run.chain = scenario.chain;
    run.emitted_rate_hz = 20000.0;
    run.duration_s = 2.0;
    run.master_seed = scenario.seed;
    run.chunk_cells = 1;
    const TimeTagStream a = run_collect_pipeline(run);
    run.chunk_cells = 1000;
    const TimeTagStream b = run_collect_pipeline(run);
    t.check("pipeline independent of slab size", a.tags == b.tags,
            std::to_string(a.tags.size()) + " tags");
    const TimeTagStream c = run_collect_pipeline(run);
    t.check("pipeline deterministic under fixed seed", b.tags == c.tags);
  }

  // Scenario schema rejects unknown keys.
  {
    bool rejected = false;
    try {
      parse_scenario_json("{\"schema_version\":1,\"unknown_knob\":3}");
    } catch (const SchemaError&) {
      rejected = true;
    }
    t.check("scenario schema rejects unknown keys", rejected);
  }

  std::cout << (t.failures == 0 ? "selftest: all checks passed\n"
                                : "selftest: " + std::to_string(t.failures) + " check(s) failed\n");
  return t.failures == 0 ? 0 : 1;
}

}  // namespace spdcsim
