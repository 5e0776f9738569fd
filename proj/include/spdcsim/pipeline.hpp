#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "spdcsim/coincidence.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/franson_config.hpp"
#include "spdcsim/pair_source.hpp"

namespace spdcsim {

/// Stage seeds derived from one master seed; fixed purpose tags keep every
/// stage's randomness independent.
struct PipelineSeeds {
  uint64_t source = 0;
  uint64_t detect = 0;
  uint64_t franson = 0;
};
PipelineSeeds derive_pipeline_seeds(uint64_t master);

/// Bounded-memory driver: generates pairs cell by cell, optionally applies
/// the Franson analyzer, detects, merges dark counts and hands time-sorted
/// tags to `sink` in chunks. Output is independent of `chunk_cells` (all
/// randomness is keyed per pair / per cell, and a carry-over guard larger
/// than the jitter clamp plus analyzer delay protects chunk boundaries).
struct PipelineRun {
  SourceSpec source;
  DetectionChain chain;
  double emitted_rate_hz = 0.0;
  double duration_s = 0.0;
  uint64_t master_seed = 0;
  std::optional<FransonConfig> franson;
  /// Cells per chunk; 0 picks a size that keeps the per-chunk pair buffer
  /// near a fixed event budget regardless of rate.
  int64_t chunk_cells = 0;
};

void run_tag_pipeline(const PipelineRun& run,
                      const std::function<void(std::span<const TimeTag>)>& sink);

/// Convenience: pipeline straight into a correlator.
CoincidenceHistogram run_coincidence_pipeline(const PipelineRun& run,
                                              const HistogramConfig& hist);

/// Convenience: pipeline into a materialized tag stream.
TimeTagStream run_collect_pipeline(const PipelineRun& run);

}  // namespace spdcsim
