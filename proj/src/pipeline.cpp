#include "spdcsim/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "spdcsim/errors.hpp"
#include "spdcsim/franson.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

PipelineSeeds derive_pipeline_seeds(uint64_t master) {
  PipelineSeeds s;
  s.source = derive_seed(master, 0x736F7572);   // "sour"
  s.detect = derive_seed(master, 0x64657463);   // "detc"
  s.franson = derive_seed(master, 0x6672616E);  // "fran"
  return s;
}

void run_tag_pipeline(const PipelineRun& run,
                      const std::function<void(std::span<const TimeTag>)>& sink) {
  run.chain.validate();
  run.source.validate();
  if (run.franson) {
    run.franson->validate();
    if (fs_to_s(static_cast<double>(run.franson->arm_delay_fs)) >=
        run.source.pump_coherence_time_s) {
      throw ValidationError("source pump coherence must exceed the analyzer arm delay");
    }
  }
  if (run.chunk_cells < 0) throw DomainError("chunk must be >= 0 cells");
  int64_t chunk_cells = run.chunk_cells;
  if (chunk_cells == 0) {
    // ~256k expected pairs per chunk, at least one cell, at most 4 s of cells.
    const double per_cell = run.emitted_rate_hz * fs_to_s(static_cast<double>(kCellFs));
    chunk_cells = per_cell > 0.0
                      ? std::clamp<int64_t>(static_cast<int64_t>(262144.0 / per_cell), 1, 4000)
                      : 4000;
  }

  const PipelineSeeds seeds = derive_pipeline_seeds(run.master_seed);
  PairGenerator gen(run.source, run.emitted_rate_hz, run.duration_s, seeds.source,
                    /*sample_wavelengths=*/false);
  const int64_t duration_fs = gen.duration_fs();

  // A click cannot stray further than the jitter clamp plus the analyzer
  // delay from its emission time; tags older than that are final.
  int64_t guard_fs =
      static_cast<int64_t>(std::ceil(kJitterClampSigmas * run.chain.jitter_sigma_fs)) + 1;
  if (run.franson) guard_fs += run.franson->arm_delay_fs;

  std::vector<PairEvent> pairs;
  std::vector<TimeTag> clicks;
  std::vector<TimeTag> carry;
  int64_t cell = 0;
  bool more = true;
  while (more) {
    pairs.clear();
    const int64_t chunk_first_cell = cell;
    for (int64_t i = 0; i < chunk_cells && more; ++i) {
      more = gen.next_cell(pairs);
      if (more) ++cell;
    }
    if (run.franson) {
      pairs = transform_pairs(pairs, *run.franson, seeds.franson);
    }

    clicks.clear();
    clicks.insert(clicks.end(), carry.begin(), carry.end());
    carry.clear();
    detail::detect_pairs_into(pairs, run.chain, seeds.detect, clicks);
    detail::dark_counts_into(run.chain, seeds.detect, 1, chunk_first_cell, cell, duration_fs,
                             clicks);
    detail::dark_counts_into(run.chain, seeds.detect, 2, chunk_first_cell, cell, duration_fs,
                             clicks);
    std::sort(clicks.begin(), clicks.end());

    if (more) {
      const int64_t boundary = cell * kCellFs - guard_fs;
      const auto split = std::lower_bound(
          clicks.begin(), clicks.end(), boundary,
          [](const TimeTag& t, int64_t b) { return t.time_fs < b; });
      carry.assign(split, clicks.end());
      clicks.erase(split, clicks.end());
    }
    if (!clicks.empty()) sink(std::span<const TimeTag>(clicks));
  }
}

CoincidenceHistogram run_coincidence_pipeline(const PipelineRun& run,
                                              const HistogramConfig& hist) {
  Correlator corr(hist);
  run_tag_pipeline(run, [&corr](std::span<const TimeTag> tags) { corr.feed(tags); });
  return corr.finish(run.duration_s);
}

TimeTagStream run_collect_pipeline(const PipelineRun& run) {
  TimeTagStream stream;
  stream.duration_s = run.duration_s;
  stream.seed = run.master_seed;
  stream.chain_description = run.chain.describe();
  run_tag_pipeline(run, [&stream](std::span<const TimeTag> tags) {
    stream.tags.insert(stream.tags.end(), tags.begin(), tags.end());
  });
  return stream;
}

}  // namespace spdcsim
