#include "spdcsim/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "json.hpp"
#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/pipeline.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void HistogramConfig::validate() const {
  if (!(bin_width_fs > 0)) throw ValidationError("bin width must be positive");
  if (!(span_fs >= coincidence_window_fs)) {
    throw ValidationError("histogram span must cover the coincidence window");
  }
  if (span_fs % bin_width_fs != 0) throw ValidationError("bin width must divide the span");
  if (coincidence_window_fs <= 0 || coincidence_window_fs % bin_width_fs != 0) {
    throw ValidationError("bin width must divide the coincidence window");
  }
  if (accidental_window_total_fs <= 0 || accidental_window_total_fs % bin_width_fs != 0) {
    throw ValidationError("bin width must divide the accidental window");
  }
  if ((accidental_window_total_fs / bin_width_fs) % 2 != 0) {
    throw ValidationError("accidental window must split evenly into two sides");
  }
  if (accidental_offset_windows < 1) throw ValidationError("accidental offset must be >= 1 window");
  const int64_t needed = accidental_offset_windows * coincidence_window_fs +
                         accidental_window_total_fs / 2;
  if (span_fs < needed) {
    throw ValidationError("span too small for the accidental windows at their offset");
  }
}

int64_t CoincidenceHistogram::total() const {
  int64_t sum = 0;
  for (const int64_t c : counts) sum += c;
  return sum;
}

int64_t CoincidenceHistogram::counts_within(int64_t center_fs, int64_t halfwidth_fs) const {
  int64_t sum = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const int64_t c = bin_center_fs(static_cast<int64_t>(i));
    if (std::llabs(c - center_fs) <= halfwidth_fs) sum += counts[i];
  }
  return sum;
}

Correlator::Correlator(const HistogramConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  counts_.assign(static_cast<size_t>(cfg_.n_bins()), 0);
  last_time_ = std::numeric_limits<int64_t>::min();
}

void Correlator::feed(const TimeTag& tag) {
  if (tag.time_fs < last_time_) {
    throw OrderingError("time tags must be fed in non-decreasing time order");
  }
  last_time_ = tag.time_fs;
  if (tag.channel != 1 && tag.channel != 2) throw ValidationError("channel must be 1 or 2");

  const int64_t span = cfg_.span_fs;
  const int64_t cutoff = tag.time_fs - span;
  while (!ch1_.empty() && ch1_.front() < cutoff) ch1_.pop_front();
  while (!ch2_.empty() && ch2_.front() < cutoff) ch2_.pop_front();

  // Pair the new tag with every buffered opposite-channel tag; each cross
  // pair is counted exactly once, when its later member arrives.
  const int64_t offset = cfg_.max_bin_index();
  const int64_t bw = cfg_.bin_width_fs;
  const auto bin_of = [bw](int64_t delta) {
    // bin k covers [k*bw - bw/2, k*bw + bw/2)
    const int64_t shifted = 2 * delta + bw;  // 2*(delta + bw/2), exact for odd bw too
    const int64_t two_bw = 2 * bw;
    return shifted >= 0 ? shifted / two_bw : -((-shifted + two_bw - 1) / two_bw);
  };
  if (tag.channel == 1) {
    for (const int64_t t2 : ch2_) {
      const int64_t bin = bin_of(t2 - tag.time_fs);
      if (bin >= -offset && bin <= offset) counts_[static_cast<size_t>(bin + offset)]++;
    }
    ch1_.push_back(tag.time_fs);
  } else {
    for (const int64_t t1 : ch1_) {
      const int64_t bin = bin_of(tag.time_fs - t1);
      if (bin >= -offset && bin <= offset) counts_[static_cast<size_t>(bin + offset)]++;
    }
    ch2_.push_back(tag.time_fs);
  }
}

void Correlator::feed(std::span<const TimeTag> tags) {
  for (const TimeTag& t : tags) feed(t);
}

CoincidenceHistogram Correlator::finish(double duration_s) const {
  CoincidenceHistogram hist;
  hist.cfg = cfg_;
  hist.counts = counts_;
  hist.duration_s = duration_s;
  return hist;
}

CoincidenceHistogram correlate(const TimeTagStream& stream, const HistogramConfig& cfg) {
  Correlator corr(cfg);
  corr.feed(std::span<const TimeTag>(stream.tags));
  return corr.finish(stream.duration_s);
}

double CarResult::car_sigma() const {
  if (lower_bound || c_c <= 0.0 || a_c_raw <= 0.0) return 0.0;
  return car * std::sqrt(1.0 / c_c + 1.0 / a_c_raw);
}

std::string CarResult::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "coincidence_summary";
  nlohmann::ordered_json params;
  params["c_c"] = {{"value", c_c}, {"stderr", std::sqrt(std::max(c_c, 0.0))}};
  params["a_c"] = {{"value", a_c}, {"stderr", a_c_raw > 0.0 ? a_c * std::sqrt(1.0 / a_c_raw) : 0.0}};
  params["car"] = {{"value", car}, {"stderr", car_sigma()}};
  params["pcr_hz"] = {{"value", pcr_hz},
                      {"stderr", c_c > 0.0 ? pcr_hz / std::sqrt(c_c) : 0.0}};
  j["params"] = params;
  j["peak_center_fs"] = peak_center_fs;
  j["car_is_lower_bound"] = lower_bound;
  return j.dump(2) + "\n";
}

CarResult car_pcr(const CoincidenceHistogram& hist) {
  hist.cfg.validate();
  if (hist.counts.empty() || hist.total() == 0) {
    throw DomainError("empty histogram: no coincidences to analyse");
  }
  if (!(hist.duration_s > 0.0)) throw DomainError("histogram has no duration");

  const int64_t bw = hist.cfg.bin_width_fs;
  const int64_t k_max = hist.cfg.max_bin_index();

  // Peak = max bin refined by a +-3 bin centroid.
  int64_t best = 0;
  for (size_t i = 1; i < hist.counts.size(); ++i) {
    if (hist.counts[i] > hist.counts[static_cast<size_t>(best)]) best = static_cast<int64_t>(i);
  }
  double num = 0.0, den = 0.0;
  for (int64_t i = std::max<int64_t>(0, best - 3);
       i <= std::min<int64_t>(static_cast<int64_t>(hist.counts.size()) - 1, best + 3); ++i) {
    num += static_cast<double>(hist.bin_center_fs(i)) *
           static_cast<double>(hist.counts[static_cast<size_t>(i)]);
    den += static_cast<double>(hist.counts[static_cast<size_t>(i)]);
  }
  const double centroid_fs = den > 0.0 ? num / den : static_cast<double>(hist.bin_center_fs(best));
  const int64_t c_bin = std::llround(centroid_fs / static_cast<double>(bw));

  const int64_t n_win = hist.cfg.coincidence_window_fs / bw;
  const int64_t lo = c_bin - (n_win - 1) / 2;
  const int64_t hi = c_bin + n_win / 2;
  if (lo < -k_max || hi > k_max) {
    throw DomainError("coincidence window around the located peak leaves the histogram span");
  }

  CarResult result;
  result.peak_center_fs = c_bin * bw;
  for (int64_t k = lo; k <= hi; ++k) {
    result.c_c += static_cast<double>(hist.counts[static_cast<size_t>(k + k_max)]);
  }

  const int64_t acc_side_bins = hist.cfg.accidental_window_total_fs / bw / 2;
  const int64_t inner = hist.cfg.accidental_offset_windows * n_win;
  int64_t acc_bins_used = 0;
  for (int64_t j = 0; j < acc_side_bins; ++j) {
    for (const int64_t k : {c_bin + inner + j, c_bin - inner - j}) {
      if (k >= -k_max && k <= k_max) {
        result.a_c_raw += static_cast<double>(hist.counts[static_cast<size_t>(k + k_max)]);
        ++acc_bins_used;
      }
    }
  }
  if (acc_bins_used == 0) {
    throw DomainError("no accidental window bins inside the histogram span");
  }

  result.a_c = result.a_c_raw * static_cast<double>(n_win) / static_cast<double>(acc_bins_used);
  if (result.a_c > 0.0) {
    result.car = result.c_c / result.a_c;
  } else {
    result.car = result.c_c;  // "> C_C / 1": report as a lower bound
    result.lower_bound = true;
  }
  result.pcr_hz = result.c_c / hist.duration_s;
  return result;
}

std::vector<ScanRow> car_scan(const SourceSpec& source, const DetectionChain& chain,
                              const HistogramConfig& hist, const std::vector<double>& powers_mw,
                              const std::vector<double>& durations_s, uint64_t seed) {
  hist.validate();
  chain.validate();
  if (powers_mw.empty()) throw DomainError("scan needs at least one power");
  if (!durations_s.empty() && durations_s.size() != powers_mw.size() && durations_s.size() != 1) {
    throw DomainError("durations must be empty, one value, or one per power");
  }
  for (const double p : powers_mw) {
    if (!(p > 0.0)) throw DomainError("scan powers must be positive");
  }

  const double pair_eff =
      chain.pair_detection_efficiency(static_cast<double>(hist.coincidence_window_fs));
  const double survival = chain.photon_survival_probability();
  const double window_s = fs_to_s(static_cast<double>(hist.coincidence_window_fs));

  const auto run_one = [&](size_t i) {
    const double power = powers_mw[i];
    const double duration =
        durations_s.empty() ? 10.0 : durations_s[durations_s.size() == 1 ? 0 : i];
    PipelineRun run;
    run.source = source;
    run.chain = chain;
    run.emitted_rate_hz = emitted_pair_rate_hz(source, power, pair_eff);
    run.duration_s = duration;
    run.master_seed = derive_seed(seed, 0xC0A5C000u + i);

    const CoincidenceHistogram h = run_coincidence_pipeline(run, hist);
    const CarResult analysis = car_pcr(h);

    const double r_ch = run.emitted_rate_hz * survival + chain.dark_count_rate_hz;
    ScanRow row;
    row.power_mw = power;
    row.pcr_hz = analysis.pcr_hz;
    row.car = analysis.car;
    row.car_pred = source.pcr_slope_hz_per_mw * power / (r_ch * r_ch * window_s);
    row.c_c = analysis.c_c;
    row.a_c_raw = analysis.a_c_raw;
    row.lower_bound = analysis.lower_bound;
    return row;
  };

  // Powers are independent seeded runs; evaluate them concurrently.
  std::vector<std::future<ScanRow>> futures;
  futures.reserve(powers_mw.size());
  for (size_t i = 0; i < powers_mw.size(); ++i) {
    futures.push_back(std::async(std::launch::async, run_one, i));
  }
  std::vector<ScanRow> rows;
  rows.reserve(powers_mw.size());
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

void save_histogram_csv(const std::string& path, const CoincidenceHistogram& hist) {
  std::vector<std::vector<double>> rows;
  rows.reserve(hist.counts.size());
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    rows.push_back({static_cast<double>(hist.bin_center_fs(static_cast<int64_t>(i))),
                    static_cast<double>(hist.counts[i])});
  }
  write_csv(path, {"delay_fs", "counts"}, rows);
}

void save_scan_csv(const std::string& path, const std::vector<ScanRow>& rows) {
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const ScanRow& r : rows) {
    data.push_back({r.power_mw, r.pcr_hz, r.car, r.car_pred});
  }
  write_csv(path, {"power_mw", "pcr_hz", "car", "car_pred"}, data);
}

}  // namespace spdcsim
