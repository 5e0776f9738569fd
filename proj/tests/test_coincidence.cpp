#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "spdcsim/coincidence.hpp"
#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/scenario.hpp"
#include "spdcsim/units.hpp"
#include "test_support.hpp"

using namespace spdcsim;

namespace {

TimeTagStream random_stream(uint64_t seed, size_t n, int64_t max_step_fs) {
  TimeTagStream stream;
  KeyedStream rng(seed, Stream::kTest, 0);
  int64_t t = 0;
  for (size_t i = 0; i < n; ++i) {
    t += static_cast<int64_t>(rng.uniform() * static_cast<double>(max_step_fs));
    stream.tags.push_back(TimeTag{t, static_cast<uint8_t>(rng.uniform() < 0.5 ? 1 : 2)});
  }
  stream.duration_s = fs_to_s(static_cast<double>(t)) + 1e-9;
  return stream;
}

}  // namespace

TEST_CASE("simultaneous tags land in the zero-delay bin") {
  HistogramConfig cfg;
  TimeTagStream stream;
  stream.tags = {TimeTag{500000, 1}, TimeTag{500000, 2}};
  stream.duration_s = 1.0;
  const CoincidenceHistogram hist = correlate(stream, cfg);
  CHECK(hist.total() == 1);
  CHECK(hist.counts[static_cast<size_t>(cfg.max_bin_index())] == 1);
}

TEST_CASE("histogram peak width tracks the pair spread") {
  HistogramConfig cfg;
  KeyedStream rng(3, Stream::kTest, 1);
  TimeTagStream stream;
  const double spread_fs = 10000.0;
  std::vector<double> deltas;
  for (int i = 0; i < 1000; ++i) {
    const int64_t t = static_cast<int64_t>(i + 1) * 1000000000;
    const int64_t d = static_cast<int64_t>(std::llround(spread_fs * rng.gaussian()));
    deltas.push_back(static_cast<double>(d));
    stream.tags.push_back(TimeTag{t, 1});
    stream.tags.push_back(TimeTag{t + d, 2});
  }
  std::sort(stream.tags.begin(), stream.tags.end());
  stream.duration_s = 1.001;
  const CoincidenceHistogram hist = correlate(stream, cfg);

  // second moment of the histogram within +-5 sigma of zero
  double n = 0.0, mean = 0.0;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    const double c = static_cast<double>(hist.bin_center_fs(static_cast<int64_t>(i)));
    if (std::abs(c) > 5.0 * spread_fs) continue;
    n += static_cast<double>(hist.counts[i]);
    mean += c * static_cast<double>(hist.counts[i]);
  }
  mean /= n;
  double var = 0.0;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    const double c = static_cast<double>(hist.bin_center_fs(static_cast<int64_t>(i)));
    if (std::abs(c) > 5.0 * spread_fs) continue;
    var += (c - mean) * (c - mean) * static_cast<double>(hist.counts[i]);
  }
  const double hist_sigma = std::sqrt(var / n);
  CHECK(std::abs(hist_sigma - spread_fs) < 0.15 * spread_fs);
  CHECK(hist_sigma == doctest::Approx(testsupport::stddev_of(deltas)).epsilon(0.1));
}

TEST_CASE("streaming correlator is bin-exact against the quadratic oracle") {
  HistogramConfig cfg;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const size_t n = 100 + static_cast<size_t>(seed) * 150;
    const TimeTagStream stream = random_stream(seed, n, 300000);
    const CoincidenceHistogram fast = correlate(stream, cfg);
    CHECK(fast.counts == testsupport::brute_force_histogram(stream.tags, cfg));
  }
}

TEST_CASE("correlator rejects unsorted input") {
  HistogramConfig cfg;
  Correlator corr(cfg);
  corr.feed(TimeTag{1000, 1});
  CHECK_THROWS_AS(corr.feed(TimeTag{999, 2}), OrderingError);
  CHECK_THROWS_AS(corr.feed(TimeTag{2000, 3}), ValidationError);
}

TEST_CASE("total counts survive bin refinement") {
  const TimeTagStream stream = random_stream(5, 4000, 200000);
  HistogramConfig cfg;
  int64_t reference = -1;
  for (const int64_t bw : {2000, 1000, 500, 250}) {
    cfg.bin_width_fs = bw;
    const CoincidenceHistogram hist = correlate(stream, cfg);
    if (reference < 0) reference = hist.total();
    CHECK(hist.total() == reference);
  }
}

TEST_CASE("histogram invariant under time translation") {
  HistogramConfig cfg;
  TimeTagStream stream = random_stream(6, 3000, 150000);
  const CoincidenceHistogram base = correlate(stream, cfg);
  for (auto& tag : stream.tags) tag.time_fs += 123456789;
  const CoincidenceHistogram shifted = correlate(stream, cfg);
  CHECK(base.counts == shifted.counts);
}

TEST_CASE("car_pcr on a constructed histogram") {
  HistogramConfig cfg;
  CoincidenceHistogram hist;
  hist.cfg = cfg;
  hist.counts.assign(static_cast<size_t>(cfg.n_bins()), 0);
  hist.duration_s = 5.0;
  const int64_t k_max = cfg.max_bin_index();
  hist.counts[static_cast<size_t>(k_max)] = 8175;  // peak bin at zero delay
  // accidental floor: 24 counts spread over the 120 accidental bins
  const int64_t n_win = cfg.coincidence_window_fs / cfg.bin_width_fs;
  const int64_t inner = cfg.accidental_offset_windows * n_win;
  const int64_t acc_side = cfg.accidental_window_total_fs / cfg.bin_width_fs / 2;
  for (int64_t j = 0; j < acc_side; j += 5) {
    hist.counts[static_cast<size_t>(k_max + inner + j)] = 1;
    hist.counts[static_cast<size_t>(k_max - inner - j)] = 1;
  }
  const CarResult r = car_pcr(hist);
  CHECK(r.c_c == 8175.0);
  CHECK(r.a_c_raw == 24.0);
  CHECK(r.a_c == doctest::Approx(5.0));  // 24 * 25/120
  CHECK(r.car == doctest::Approx(1635.0));
  CHECK_FALSE(r.lower_bound);
  CHECK(r.pcr_hz == doctest::Approx(8175.0 / 5.0));
}

TEST_CASE("zero accidentals reported as a lower bound") {
  HistogramConfig cfg;
  CoincidenceHistogram hist;
  hist.cfg = cfg;
  hist.counts.assign(static_cast<size_t>(cfg.n_bins()), 0);
  hist.duration_s = 30.0;
  hist.counts[static_cast<size_t>(cfg.max_bin_index())] = 100;
  const CarResult r = car_pcr(hist);
  CHECK(r.lower_bound);
  CHECK(r.car == 100.0);
  CHECK(r.a_c == 0.0);
}

TEST_CASE("uncorrelated channels give CAR near one") {
  DetectionChain chain;
  chain.dark_count_rate_hz = 300000.0;
  chain.jitter_sigma_fs = 0.0;
  const TimeTagStream stream = detect({}, chain, 5.0, 13);
  const HistogramConfig cfg;
  const CarResult r = car_pcr(correlate(stream, cfg));
  CHECK_FALSE(r.lower_bound);
  CHECK(std::abs(r.car - 1.0) < 3.0 * r.car_sigma());
}

TEST_CASE("empty histogram is an error") {
  HistogramConfig cfg;
  CoincidenceHistogram hist;
  hist.cfg = cfg;
  hist.counts.assign(static_cast<size_t>(cfg.n_bins()), 0);
  hist.duration_s = 1.0;
  CHECK_THROWS_AS(car_pcr(hist), DomainError);
}

TEST_CASE("config validation") {
  HistogramConfig cfg;
  cfg.bin_width_fs = 3000;  // does not divide the 50 ps window
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = HistogramConfig{};
  cfg.span_fs = 40000;  // smaller than the window
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = HistogramConfig{};
  cfg.span_fs = 300000;  // cannot hold the accidental windows at offset 5
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = HistogramConfig{};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("short scan behaves and car decreases with power") {
  const Scenario s;
  const std::vector<double> powers = {80.0, 160.0, 320.0};
  const std::vector<double> durations = {1.5, 1.0, 0.5};
  const auto rows = car_scan(s.source, s.chain, s.histogram, powers, durations, 99);
  REQUIRE(rows.size() == 3);
  double prev_car = 1e18;
  for (const auto& row : rows) {
    CHECK_FALSE(row.lower_bound);
    CHECK(row.car < prev_car);
    prev_car = row.car;
    const double sigma = row.car * std::sqrt(1.0 / row.c_c + 1.0 / row.a_c_raw);
    CHECK(std::abs(row.car - row.car_pred) < 3.0 * sigma);
    CHECK(row.pcr_hz == doctest::Approx(s.source.pcr_slope_hz_per_mw * row.power_mw).epsilon(0.05));
  }
  CHECK_THROWS_AS(car_scan(s.source, s.chain, s.histogram, {0.0}, {1.0}, 1), DomainError);
}

TEST_CASE("histogram csv export") {
  namespace fs = std::filesystem;
  const TimeTagStream stream = random_stream(7, 500, 400000);
  HistogramConfig cfg;
  const CoincidenceHistogram hist = correlate(stream, cfg);
  const std::string path = (fs::temp_directory_path() / "hist.csv").string();
  save_histogram_csv(path, hist);
  const CsvTable t = read_csv(path, {"delay_fs", "counts"});
  CHECK(t.rows.size() == static_cast<size_t>(cfg.n_bins()));
  int64_t total = 0;
  for (const auto& row : t.rows) total += static_cast<int64_t>(row[1]);
  CHECK(total == hist.total());
  fs::remove(path);
}
