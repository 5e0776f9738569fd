#include "spdcsim/scenario.hpp"

#include <set>

#include "json.hpp"
#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"

namespace spdcsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void require_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + " must be a JSON object");
}

void check_keys(const json& j, const std::string& ctx, const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw SchemaError("unknown key '" + item.key() + "' in " + ctx);
    }
  }
}

double get_number(const json& j, const std::string& ctx, const std::string& key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) throw SchemaError(ctx + "." + key + " must be a number");
  return j[key].get<double>();
}

int64_t get_integer(const json& j, const std::string& ctx, const std::string& key, int64_t def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) throw SchemaError(ctx + "." + key + " must be an integer");
  return j[key].get<int64_t>();
}

bool get_bool(const json& j, const std::string& ctx, const std::string& key, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) throw SchemaError(ctx + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

std::string get_string(const json& j, const std::string& ctx, const std::string& key,
                       const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) throw SchemaError(ctx + "." + key + " must be a string");
  return j[key].get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& ctx,
                                     const std::string& key, std::vector<double> def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_array()) throw SchemaError(ctx + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw SchemaError(ctx + "." + key + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void Scenario::validate() const {
  source.validate();
  chain.validate();
  histogram.validate();
  franson.config.validate();
  grating.validate();
  areas.validate();
  if (schema_version != 1) throw SchemaError("unsupported schema_version");
  if (shg.grid_points < 2) throw SchemaError("shg.grid_points must be >= 2");
  if (!(shg.grid_span_nm > 0.0)) throw SchemaError("shg.grid_span_nm must be positive");
  if (car_scan.powers_mw.empty()) throw SchemaError("car_scan.powers_mw must not be empty");
  if (!car_scan.durations_s.empty() && car_scan.durations_s.size() != 1 &&
      car_scan.durations_s.size() != car_scan.powers_mw.size()) {
    throw SchemaError("car_scan.durations_s must have one entry or one per power");
  }
  if (!(franson.analyzer_jitter_sigma_fs >= 0.0)) {
    throw SchemaError("franson.analyzer_jitter_sigma_fs must be >= 0");
  }
}

Scenario parse_scenario_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
  }
  require_object(j, "scenario");
  check_keys(j, "scenario",
             {"schema_version", "seed", "source", "chain", "histogram", "franson", "grating",
              "mode_areas", "shg", "car_scan", "pcr_scan", "pairs", "correlate"});
  Scenario s;
  if (!j.contains("schema_version")) throw SchemaError("scenario missing schema_version");
  if (!j["schema_version"].is_number_integer()) throw SchemaError("schema_version must be integer");
  s.schema_version = j["schema_version"].get<int>();
  if (s.schema_version != 1) throw SchemaError("unsupported schema_version (expected 1)");
  s.seed = static_cast<uint64_t>(get_integer(j, "scenario", "seed", static_cast<int64_t>(s.seed)));

  if (j.contains("source")) {
    const json& o = j["source"];
    require_object(o, "source");
    check_keys(o, "source",
               {"pcr_slope_hz_per_mw", "center_wavelength_nm", "bandwidth_fwhm_nm",
                "pump_wavelength_nm", "pump_coherence_time_s", "spectral_shape"});
    s.source.pcr_slope_hz_per_mw =
        get_number(o, "source", "pcr_slope_hz_per_mw", s.source.pcr_slope_hz_per_mw);
    s.source.center_wavelength_nm =
        get_number(o, "source", "center_wavelength_nm", s.source.center_wavelength_nm);
    s.source.bandwidth_fwhm_nm =
        get_number(o, "source", "bandwidth_fwhm_nm", s.source.bandwidth_fwhm_nm);
    s.source.pump_wavelength_nm =
        get_number(o, "source", "pump_wavelength_nm", s.source.pump_wavelength_nm);
    s.source.pump_coherence_time_s =
        get_number(o, "source", "pump_coherence_time_s", s.source.pump_coherence_time_s);
    const std::string shape = get_string(o, "source", "spectral_shape", "gaussian");
    if (shape == "gaussian") {
      s.source.spectral_shape = SpectralShape::kGaussian;
    } else if (shape == "sinc2") {
      s.source.spectral_shape = SpectralShape::kSinc2;
    } else {
      throw SchemaError("source.spectral_shape must be 'gaussian' or 'sinc2'");
    }
  }

  if (j.contains("chain")) {
    const json& o = j["chain"];
    require_object(o, "chain");
    check_keys(o, "chain",
               {"transmission_db_per_photon", "detector_efficiency", "dark_count_rate_hz",
                "jitter_sigma_fs", "deterministic_routing"});
    s.chain.transmission_db_per_photon =
        get_number(o, "chain", "transmission_db_per_photon", s.chain.transmission_db_per_photon);
    s.chain.detector_efficiency =
        get_number(o, "chain", "detector_efficiency", s.chain.detector_efficiency);
    s.chain.dark_count_rate_hz =
        get_number(o, "chain", "dark_count_rate_hz", s.chain.dark_count_rate_hz);
    s.chain.jitter_sigma_fs = get_number(o, "chain", "jitter_sigma_fs", s.chain.jitter_sigma_fs);
    s.chain.deterministic_routing =
        get_bool(o, "chain", "deterministic_routing", s.chain.deterministic_routing);
  }

  if (j.contains("histogram")) {
    const json& o = j["histogram"];
    require_object(o, "histogram");
    check_keys(o, "histogram",
               {"bin_width_fs", "span_fs", "coincidence_window_fs", "accidental_window_total_fs",
                "accidental_offset_windows"});
    s.histogram.bin_width_fs =
        get_integer(o, "histogram", "bin_width_fs", s.histogram.bin_width_fs);
    s.histogram.span_fs = get_integer(o, "histogram", "span_fs", s.histogram.span_fs);
    s.histogram.coincidence_window_fs =
        get_integer(o, "histogram", "coincidence_window_fs", s.histogram.coincidence_window_fs);
    s.histogram.accidental_window_total_fs = get_integer(
        o, "histogram", "accidental_window_total_fs", s.histogram.accidental_window_total_fs);
    s.histogram.accidental_offset_windows = get_integer(
        o, "histogram", "accidental_offset_windows", s.histogram.accidental_offset_windows);
  }

  if (j.contains("franson")) {
    const json& o = j["franson"];
    require_object(o, "franson");
    check_keys(o, "franson",
               {"arm_delay_fs", "fringe_period_pm", "pump_offset_pm", "constructive_offset_pm",
                "intrinsic_visibility", "single_photon_coherence_fs", "pump_coherence_fs",
                "analyzer_jitter_sigma_fs", "peak_halfwidth_fs", "scan_offsets_pm",
                "scan_duration_s", "histogram_duration_s", "pump_power_mw",
                "destructive_offset_pm"});
    FransonConfig& c = s.franson.config;
    c.arm_delay_fs = get_integer(o, "franson", "arm_delay_fs", c.arm_delay_fs);
    c.fringe_period_pm = get_number(o, "franson", "fringe_period_pm", c.fringe_period_pm);
    c.pump_offset_pm = get_number(o, "franson", "pump_offset_pm", c.pump_offset_pm);
    c.constructive_offset_pm =
        get_number(o, "franson", "constructive_offset_pm", c.constructive_offset_pm);
    c.intrinsic_visibility =
        get_number(o, "franson", "intrinsic_visibility", c.intrinsic_visibility);
    c.single_photon_coherence_fs =
        get_number(o, "franson", "single_photon_coherence_fs", c.single_photon_coherence_fs);
    c.pump_coherence_fs = get_number(o, "franson", "pump_coherence_fs", c.pump_coherence_fs);
    s.franson.analyzer_jitter_sigma_fs =
        get_number(o, "franson", "analyzer_jitter_sigma_fs", s.franson.analyzer_jitter_sigma_fs);
    s.franson.peak_halfwidth_fs =
        get_integer(o, "franson", "peak_halfwidth_fs", s.franson.peak_halfwidth_fs);
    s.franson.scan_offsets_pm =
        get_number_array(o, "franson", "scan_offsets_pm", s.franson.scan_offsets_pm);
    s.franson.scan_duration_s =
        get_number(o, "franson", "scan_duration_s", s.franson.scan_duration_s);
    s.franson.histogram_duration_s =
        get_number(o, "franson", "histogram_duration_s", s.franson.histogram_duration_s);
    s.franson.pump_power_mw = get_number(o, "franson", "pump_power_mw", s.franson.pump_power_mw);
    s.franson.destructive_offset_pm =
        get_number(o, "franson", "destructive_offset_pm", s.franson.destructive_offset_pm);
  }

  if (j.contains("grating")) {
    const json& o = j["grating"];
    require_object(o, "grating");
    check_keys(o, "grating", {"length_mm", "period_um", "chi2_eff_pm_per_v", "waveguide_length_mm"});
    s.grating.length_m = get_number(o, "grating", "length_mm", s.grating.length_m * 1e3) * 1e-3;
    s.grating.period_m = get_number(o, "grating", "period_um", s.grating.period_m * 1e6) * 1e-6;
    s.grating.chi2_eff_m_per_v =
        get_number(o, "grating", "chi2_eff_pm_per_v", s.grating.chi2_eff_m_per_v * 1e12) * 1e-12;
    if (o.contains("waveguide_length_mm") && !o["waveguide_length_mm"].is_null()) {
      s.grating.waveguide_length_m =
          get_number(o, "grating", "waveguide_length_mm", 0.0) * 1e-3;
    }
  }

  if (j.contains("mode_areas")) {
    const json& o = j["mode_areas"];
    require_object(o, "mode_areas");
    check_keys(o, "mode_areas", {"s_fh_um2", "s_sh_um2"});
    s.areas.s_fh_m2 = get_number(o, "mode_areas", "s_fh_um2", s.areas.s_fh_m2 * 1e12) * 1e-12;
    s.areas.s_sh_m2 = get_number(o, "mode_areas", "s_sh_um2", s.areas.s_sh_m2 * 1e12) * 1e-12;
  }

  if (j.contains("shg")) {
    const json& o = j["shg"];
    require_object(o, "shg");
    check_keys(o, "shg", {"grid_center_nm", "grid_span_nm", "grid_points", "noise_sigma_rel"});
    s.shg.grid_center_nm = get_number(o, "shg", "grid_center_nm", s.shg.grid_center_nm);
    s.shg.grid_span_nm = get_number(o, "shg", "grid_span_nm", s.shg.grid_span_nm);
    s.shg.grid_points = static_cast<int>(get_integer(o, "shg", "grid_points", s.shg.grid_points));
    s.shg.noise_sigma_rel = get_number(o, "shg", "noise_sigma_rel", s.shg.noise_sigma_rel);
  }

  if (j.contains("car_scan")) {
    const json& o = j["car_scan"];
    require_object(o, "car_scan");
    check_keys(o, "car_scan", {"powers_mw", "durations_s"});
    s.car_scan.powers_mw = get_number_array(o, "car_scan", "powers_mw", s.car_scan.powers_mw);
    s.car_scan.durations_s =
        get_number_array(o, "car_scan", "durations_s", s.car_scan.durations_s);
  }

  if (j.contains("pcr_scan")) {
    const json& o = j["pcr_scan"];
    require_object(o, "pcr_scan");
    check_keys(o, "pcr_scan", {"powers_mw", "duration_s"});
    s.pcr_scan.powers_mw = get_number_array(o, "pcr_scan", "powers_mw", s.pcr_scan.powers_mw);
    s.pcr_scan.duration_s = get_number(o, "pcr_scan", "duration_s", s.pcr_scan.duration_s);
  }

  if (j.contains("pairs")) {
    const json& o = j["pairs"];
    require_object(o, "pairs");
    check_keys(o, "pairs", {"pump_power_mw", "duration_s"});
    s.pairs.pump_power_mw = get_number(o, "pairs", "pump_power_mw", s.pairs.pump_power_mw);
    s.pairs.duration_s = get_number(o, "pairs", "duration_s", s.pairs.duration_s);
  }

  if (j.contains("correlate")) {
    const json& o = j["correlate"];
    require_object(o, "correlate");
    check_keys(o, "correlate", {"duration_s"});
    s.correlate_duration_s = get_number(o, "correlate", "duration_s", s.correlate_duration_s);
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  return parse_scenario_json(read_text_file(path));
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["schema_version"] = s.schema_version;
  j["seed"] = s.seed;
  j["source"] = {
      {"pcr_slope_hz_per_mw", s.source.pcr_slope_hz_per_mw},
      {"center_wavelength_nm", s.source.center_wavelength_nm},
      {"bandwidth_fwhm_nm", s.source.bandwidth_fwhm_nm},
      {"pump_wavelength_nm", s.source.pump_wavelength_nm},
      {"pump_coherence_time_s", s.source.pump_coherence_time_s},
      {"spectral_shape",
       s.source.spectral_shape == SpectralShape::kGaussian ? "gaussian" : "sinc2"},
  };
  j["chain"] = {
      {"transmission_db_per_photon", s.chain.transmission_db_per_photon},
      {"detector_efficiency", s.chain.detector_efficiency},
      {"dark_count_rate_hz", s.chain.dark_count_rate_hz},
      {"jitter_sigma_fs", s.chain.jitter_sigma_fs},
      {"deterministic_routing", s.chain.deterministic_routing},
  };
  j["histogram"] = {
      {"bin_width_fs", s.histogram.bin_width_fs},
      {"span_fs", s.histogram.span_fs},
      {"coincidence_window_fs", s.histogram.coincidence_window_fs},
      {"accidental_window_total_fs", s.histogram.accidental_window_total_fs},
      {"accidental_offset_windows", s.histogram.accidental_offset_windows},
  };
  j["franson"] = {
      {"arm_delay_fs", s.franson.config.arm_delay_fs},
      {"fringe_period_pm", s.franson.config.fringe_period_pm},
      {"pump_offset_pm", s.franson.config.pump_offset_pm},
      {"constructive_offset_pm", s.franson.config.constructive_offset_pm},
      {"intrinsic_visibility", s.franson.config.intrinsic_visibility},
      {"single_photon_coherence_fs", s.franson.config.single_photon_coherence_fs},
      {"pump_coherence_fs", s.franson.config.pump_coherence_fs},
      {"analyzer_jitter_sigma_fs", s.franson.analyzer_jitter_sigma_fs},
      {"peak_halfwidth_fs", s.franson.peak_halfwidth_fs},
      {"scan_offsets_pm", s.franson.scan_offsets_pm},
      {"scan_duration_s", s.franson.scan_duration_s},
      {"histogram_duration_s", s.franson.histogram_duration_s},
      {"pump_power_mw", s.franson.pump_power_mw},
      {"destructive_offset_pm", s.franson.destructive_offset_pm},
  };
  j["grating"] = {
      {"length_mm", s.grating.length_m * 1e3},
      {"period_um", s.grating.period_m * 1e6},
      {"chi2_eff_pm_per_v", s.grating.chi2_eff_m_per_v * 1e12},
      {"waveguide_length_mm", s.grating.waveguide_length_m
                                  ? ordered_json(*s.grating.waveguide_length_m * 1e3)
                                  : ordered_json(nullptr)},
  };
  j["mode_areas"] = {
      {"s_fh_um2", s.areas.s_fh_m2 * 1e12},
      {"s_sh_um2", s.areas.s_sh_m2 * 1e12},
  };
  j["shg"] = {
      {"grid_center_nm", s.shg.grid_center_nm},
      {"grid_span_nm", s.shg.grid_span_nm},
      {"grid_points", s.shg.grid_points},
      {"noise_sigma_rel", s.shg.noise_sigma_rel},
  };
  j["car_scan"] = {
      {"powers_mw", s.car_scan.powers_mw},
      {"durations_s", s.car_scan.durations_s},
  };
  j["pcr_scan"] = {
      {"powers_mw", s.pcr_scan.powers_mw},
      {"duration_s", s.pcr_scan.duration_s},
  };
  j["pairs"] = {
      {"pump_power_mw", s.pairs.pump_power_mw},
      {"duration_s", s.pairs.duration_s},
  };
  j["correlate"] = {
      {"duration_s", s.correlate_duration_s},
  };
  return j.dump(2) + "\n";
}

void save_scenario(const std::string& path, const Scenario& s) {
  write_text_file(path, scenario_to_json(s));
}

}  // namespace spdcsim
