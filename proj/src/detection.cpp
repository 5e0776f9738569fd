#include "spdcsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void DetectionChain::validate() const {
  if (!(transmission_db_per_photon >= 0.0)) throw ValidationError("transmission dB must be >= 0");
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) {
    throw ValidationError("detector efficiency must be in (0, 1]");
  }
  if (!(dark_count_rate_hz >= 0.0)) throw ValidationError("dark rate must be >= 0");
  if (!(jitter_sigma_fs >= 0.0)) throw ValidationError("jitter sigma must be >= 0");
}

double DetectionChain::photon_survival_probability() const {
  return db_to_fraction(transmission_db_per_photon) * detector_efficiency;
}

double DetectionChain::pair_coincidence_probability() const {
  const double p = photon_survival_probability();
  return deterministic_routing ? p * p : p * p / 2.0;
}

double DetectionChain::window_capture_fraction(double window_fs) const {
  if (!(window_fs > 0.0)) throw DomainError("window must be positive");
  if (jitter_sigma_fs == 0.0) return 1.0;
  const double sigma_rel = jitter_sigma_fs * std::sqrt(2.0);
  return std::erf(window_fs / 2.0 / (sigma_rel * std::sqrt(2.0)));
}

double DetectionChain::pair_detection_efficiency(double window_fs) const {
  return pair_coincidence_probability() * window_capture_fraction(window_fs);
}

std::string DetectionChain::describe() const {
  std::ostringstream ss;
  ss << "transmission=" << format_double(transmission_db_per_photon)
     << "dB/photon efficiency=" << format_double(detector_efficiency)
     << " dark=" << format_double(dark_count_rate_hz)
     << "Hz jitter=" << format_double(jitter_sigma_fs) << "fs"
     << (deterministic_routing ? " routing=deterministic" : " routing=50/50");
  return ss.str();
}

namespace detail {

void detect_pairs_into(std::span<const PairEvent> pairs, const DetectionChain& chain,
                       uint64_t seed, std::vector<TimeTag>& out) {
  const double survival = chain.photon_survival_probability();
  const double sigma = chain.jitter_sigma_fs;
  for (const PairEvent& ev : pairs) {
    KeyedStream rng(seed, Stream::kDetect, ev.pair_id);
    const bool signal_clicks = rng.uniform() < survival;
    const bool idler_clicks = rng.uniform() < survival;
    if (!signal_clicks && !idler_clicks) continue;

    const auto emit = [&](int64_t delay_fs, uint8_t fixed_channel) {
      uint8_t ch = fixed_channel;
      if (!chain.deterministic_routing) ch = rng.uniform() < 0.5 ? 1 : 2;
      int64_t t = ev.emission_time_fs + delay_fs;
      if (sigma > 0.0) {
        const double g = std::clamp(rng.gaussian(), -kJitterClampSigmas, kJitterClampSigmas);
        t += static_cast<int64_t>(std::llround(g * sigma));
      }
      out.push_back(TimeTag{t, ch});
    };
    if (signal_clicks) emit(ev.signal_delay_fs, 1);
    if (idler_clicks) emit(ev.idler_delay_fs, 2);
  }
}

void dark_counts_into(const DetectionChain& chain, uint64_t seed, uint8_t channel,
                      int64_t cell_lo, int64_t cell_hi, int64_t duration_fs,
                      std::vector<TimeTag>& out) {
  if (chain.dark_count_rate_hz <= 0.0) return;
  const Stream stream = channel == 1 ? Stream::kDarkCh1 : Stream::kDarkCh2;
  for (int64_t cell = cell_lo; cell < cell_hi; ++cell) {
    const int64_t start = cell * kCellFs;
    if (start >= duration_fs) break;
    const int64_t span = std::min(start + kCellFs, duration_fs) - start;
    KeyedStream rng(seed, stream, static_cast<uint64_t>(cell));
    const uint64_t n = rng.poisson(chain.dark_count_rate_hz * fs_to_s(static_cast<double>(span)));
    for (uint64_t i = 0; i < n; ++i) {
      const int64_t t = start + static_cast<int64_t>(rng.uniform() * static_cast<double>(span));
      out.push_back(TimeTag{t, channel});
    }
  }
}

}  // namespace detail

TimeTagStream detect(const std::vector<PairEvent>& pairs, const DetectionChain& chain,
                     double duration_s, uint64_t seed) {
  chain.validate();
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  for (size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].emission_time_fs < pairs[i - 1].emission_time_fs) {
      throw OrderingError("pair stream is not time-sorted");
    }
  }

  TimeTagStream stream;
  stream.duration_s = duration_s;
  stream.seed = seed;
  stream.chain_description = chain.describe();

  const int64_t duration_fs = static_cast<int64_t>(std::llround(duration_s * kFsPerSecond));
  const int64_t n_cells = (duration_fs + kCellFs - 1) / kCellFs;
  detail::detect_pairs_into(pairs, chain, seed, stream.tags);
  detail::dark_counts_into(chain, seed, 1, 0, n_cells, duration_fs, stream.tags);
  detail::dark_counts_into(chain, seed, 2, 0, n_cells, duration_fs, stream.tags);
  std::sort(stream.tags.begin(), stream.tags.end());
  return stream;
}

std::pair<double, double> singles_rates(const TimeTagStream& stream) {
  if (!(stream.duration_s > 0.0)) throw DomainError("stream duration must be positive");
  size_t n1 = 0, n2 = 0;
  for (const TimeTag& t : stream.tags) (t.channel == 1 ? n1 : n2)++;
  return {static_cast<double>(n1) / stream.duration_s,
          static_cast<double>(n2) / stream.duration_s};
}

void save_tags_binary(const std::string& path, const TimeTagStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const TimeTag& t : stream.tags) {
    char rec[9];
    rec[0] = static_cast<char>(t.channel);
    uint64_t v = static_cast<uint64_t>(t.time_fs);
    for (int i = 0; i < 8; ++i) rec[1 + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(rec, sizeof(rec));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TimeTag> load_tags_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TimeTag> tags;
  char rec[9];
  while (in.read(rec, sizeof(rec))) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(rec[1 + i])) << (8 * i);
    const uint8_t ch = static_cast<uint8_t>(rec[0]);
    if (ch != 1 && ch != 2) throw IoError(path + ": invalid channel byte");
    tags.push_back(TimeTag{static_cast<int64_t>(v), ch});
  }
  if (in.gcount() != 0) throw IoError(path + ": truncated record");
  return tags;
}

void save_tags_csv(const std::string& path, const TimeTagStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "channel,time_fs\n";
  for (const TimeTag& t : stream.tags) {
    out << static_cast<int>(t.channel) << ',' << t.time_fs << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TimeTag> load_tags_csv(const std::string& path) {
  CsvTable t = read_csv(path, {"channel", "time_fs"});
  std::vector<TimeTag> tags;
  tags.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    const auto ch = static_cast<uint8_t>(row[0]);
    if ((row[0] != 1.0 && row[0] != 2.0)) throw IoError(path + ": invalid channel");
    tags.push_back(TimeTag{static_cast<int64_t>(row[1]), ch});
  }
  return tags;
}

}  // namespace spdcsim
