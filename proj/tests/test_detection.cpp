#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "spdcsim/csvio.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/pipeline.hpp"
#include "spdcsim/scenario.hpp"
#include "spdcsim/units.hpp"
#include "test_support.hpp"

using namespace spdcsim;

namespace {

std::vector<PairEvent> regular_pairs(size_t n, int64_t spacing_fs) {
  std::vector<PairEvent> pairs(n);
  for (size_t i = 0; i < n; ++i) {
    pairs[i].emission_time_fs = static_cast<int64_t>(i) * spacing_fs;
    pairs[i].pair_id = i;
    pairs[i].signal_wavelength_nm = 1560.0;
    pairs[i].idler_wavelength_nm = 1560.0;
  }
  return pairs;
}

}  // namespace

TEST_CASE("ideal chain with deterministic routing clicks once per channel") {
  DetectionChain chain;
  chain.transmission_db_per_photon = 0.0;
  chain.detector_efficiency = 1.0;
  chain.dark_count_rate_hz = 0.0;
  chain.jitter_sigma_fs = 0.0;
  chain.deterministic_routing = true;

  const auto pairs = regular_pairs(1000, 1000000);
  const TimeTagStream stream = detect(pairs, chain, 0.01, 4);
  REQUIRE(stream.tags.size() == 2000);
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(stream.tags[2 * i].time_fs == pairs[i].emission_time_fs);
    CHECK(stream.tags[2 * i + 1].time_fs == pairs[i].emission_time_fs);
    CHECK(stream.tags[2 * i].channel != stream.tags[2 * i + 1].channel);
  }
}

TEST_CASE("dark counts alone are poissonian per channel") {
  DetectionChain chain;
  chain.dark_count_rate_hz = 100.0;
  const double duration = 10.0;
  const TimeTagStream stream = detect({}, chain, duration, 8);
  const auto [r1, r2] = singles_rates(stream);
  const double mean = chain.dark_count_rate_hz;
  const double sigma = std::sqrt(mean / duration);
  CHECK(std::abs(r1 - mean) < 3.0 * sigma);
  CHECK(std::abs(r2 - mean) < 3.0 * sigma);
}

TEST_CASE("pair coincidence probability matches the closed form") {
  DetectionChain chain;  // 7 dB, eta 0.85
  chain.dark_count_rate_hz = 0.0;
  chain.jitter_sigma_fs = 0.0;
  const auto pairs = regular_pairs(2000000, 1000000);
  const TimeTagStream stream = detect(pairs, chain, 2000.0, 12);
  int64_t coincidences = 0;
  for (size_t i = 1; i < stream.tags.size(); ++i) {
    if (stream.tags[i].time_fs == stream.tags[i - 1].time_fs &&
        stream.tags[i].channel != stream.tags[i - 1].channel) {
      ++coincidences;
    }
  }
  const double expected =
      chain.pair_coincidence_probability() * static_cast<double>(pairs.size());
  CHECK(chain.pair_coincidence_probability() ==
        doctest::Approx(std::pow(std::pow(10.0, -0.7) * 0.85, 2.0) / 2.0).epsilon(1e-12));
  CHECK(std::abs(static_cast<double>(coincidences) - expected) < 0.02 * expected);
}

TEST_CASE("loss composition is exact in probability") {
  DetectionChain twice;
  twice.transmission_db_per_photon = 3.0 + 3.0;
  DetectionChain once;
  once.transmission_db_per_photon = 6.0;
  CHECK(twice.photon_survival_probability() == once.photon_survival_probability());
}

TEST_CASE("output stays sorted under adversarial jitter") {
  DetectionChain chain;
  chain.jitter_sigma_fs = 1e6;  // 1 ns
  chain.dark_count_rate_hz = 1000.0;
  const auto pairs = regular_pairs(20000, 100000);  // products overlap heavily
  const TimeTagStream stream = detect(pairs, chain, 0.002, 5);
  CHECK(std::is_sorted(stream.tags.begin(), stream.tags.end(),
                       [](const TimeTag& a, const TimeTag& b) { return a.time_fs < b.time_fs; }));
}

TEST_CASE("detection is deterministic under a fixed seed") {
  DetectionChain chain;
  const auto pairs = regular_pairs(5000, 500000);
  const TimeTagStream a = detect(pairs, chain, 0.0025, 9);
  const TimeTagStream b = detect(pairs, chain, 0.0025, 9);
  const TimeTagStream c = detect(pairs, chain, 0.0025, 10);
  CHECK(a.tags == b.tags);
  CHECK(a.tags != c.tags);
}

TEST_CASE("singles rates") {
  TimeTagStream stream;
  stream.duration_s = 10.0;
  for (int i = 0; i < 100; ++i) stream.tags.push_back(TimeTag{i * 1000, 1});
  const auto [r1, r2] = singles_rates(stream);
  CHECK(r1 == 10.0);
  CHECK(r2 == 0.0);

  TimeTagStream empty;
  empty.duration_s = 1.0;
  const auto [e1, e2] = singles_rates(empty);
  CHECK(e1 == 0.0);
  CHECK(e2 == 0.0);
}

TEST_CASE("singles add up: pair clicks plus darks") {
  const Scenario s;
  DetectionChain chain = s.chain;
  const double rate = 20000.0;
  PipelineRun run;
  run.source = s.source;
  run.chain = chain;
  run.emitted_rate_hz = rate;
  run.duration_s = 20.0;
  run.master_seed = 31;
  const TimeTagStream stream = run_collect_pipeline(run);
  const auto [r1, r2] = singles_rates(stream);
  const double expected = rate * chain.photon_survival_probability() + chain.dark_count_rate_hz;
  const double sigma = std::sqrt(expected / run.duration_s);
  CHECK(std::abs(r1 - expected) < 3.0 * sigma);
  CHECK(std::abs(r2 - expected) < 3.0 * sigma);
}

TEST_CASE("unsorted pair input is rejected") {
  auto pairs = regular_pairs(10, 1000);
  std::swap(pairs[3].emission_time_fs, pairs[7].emission_time_fs);
  CHECK_THROWS_AS(detect(pairs, DetectionChain{}, 1.0, 1), OrderingError);
}

TEST_CASE("chain validation") {
  DetectionChain chain;
  chain.detector_efficiency = 1.5;
  CHECK_THROWS_AS(chain.validate(), ValidationError);
  chain = DetectionChain{};
  chain.dark_count_rate_hz = -1.0;
  CHECK_THROWS_AS(chain.validate(), ValidationError);
  chain = DetectionChain{};
  chain.transmission_db_per_photon = -0.1;
  CHECK_THROWS_AS(chain.validate(), ValidationError);
}

TEST_CASE("window capture fraction") {
  DetectionChain chain;
  chain.jitter_sigma_fs = 0.0;
  CHECK(chain.window_capture_fraction(50000.0) == 1.0);
  chain.jitter_sigma_fs = 10000.0;
  // erf(25000 / (10000*sqrt(2)*sqrt(2))) = erf(1.25)
  CHECK(chain.window_capture_fraction(50000.0) == doctest::Approx(std::erf(1.25)).epsilon(1e-12));
  CHECK(chain.window_capture_fraction(100000.0) > chain.window_capture_fraction(50000.0));
  CHECK_THROWS_AS(chain.window_capture_fraction(0.0), DomainError);
}

TEST_CASE("pipeline output independent of slab size") {
  const Scenario s;
  PipelineRun run;
  run.source = s.source;
  run.chain = s.chain;
  run.emitted_rate_hz = 15000.0;
  run.duration_s = 3.0;
  run.master_seed = 41;
  run.chunk_cells = 1;
  const TimeTagStream fine = run_collect_pipeline(run);
  run.chunk_cells = 700;
  const TimeTagStream coarse = run_collect_pipeline(run);
  run.chunk_cells = 0;  // auto
  const TimeTagStream fitted = run_collect_pipeline(run);
  CHECK(fine.tags == coarse.tags);
  CHECK(fine.tags == fitted.tags);
}

TEST_CASE("tag files round-trip in both formats") {
  namespace fs = std::filesystem;
  DetectionChain chain;
  const auto pairs = regular_pairs(3000, 700000);
  const TimeTagStream stream = detect(pairs, chain, 0.0025, 77);
  REQUIRE(!stream.tags.empty());

  const std::string bin_path = (fs::temp_directory_path() / "tags_rt.bin").string();
  const std::string csv_path = (fs::temp_directory_path() / "tags_rt.csv").string();
  save_tags_binary(bin_path, stream);
  save_tags_csv(csv_path, stream);
  CHECK(load_tags_binary(bin_path) == stream.tags);
  CHECK(load_tags_csv(csv_path) == stream.tags);
  // 9 bytes per record, little-endian u8 + i64
  CHECK(fs::file_size(bin_path) == stream.tags.size() * 9);

  write_text_file(bin_path, std::string("\x03\x01\x02\x03\x04\x05\x06\x07\x08", 9));
  CHECK_THROWS_AS(load_tags_binary(bin_path), IoError);
  fs::remove(bin_path);
  fs::remove(csv_path);
}

TEST_CASE("negative-time tags survive the binary format") {
  namespace fs = std::filesystem;
  TimeTagStream stream;
  stream.tags = {TimeTag{-123456789012345, 1}, TimeTag{-5, 2}, TimeTag{7, 1}};
  const std::string path = (fs::temp_directory_path() / "tags_neg.bin").string();
  save_tags_binary(path, stream);
  CHECK(load_tags_binary(path) == stream.tags);
  fs::remove(path);
}
