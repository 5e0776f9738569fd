#pragma once

#include <optional>
#include <string>

#include "spdcsim/scenario.hpp"

namespace spdcsim {

struct CommandOptions {
  std::string out_dir = ".";
  std::string format = "csv";  // tag export: "csv" adds a CSV next to the binary
};

/// Fringe visibility above this violates the CHSH-type bound for energy-time
/// entangled pairs.
inline constexpr double kBellVisibilityThreshold = 0.71;

// Each command writes its outputs under options.out_dir together with
// scenario_used.json, and returns 0 only when all outputs were written and
// every fit converged.

/// Synthesize (or ingest) a CE spectrum and fit the QPM model to it.
int cmd_shg(const Scenario& scenario, const CommandOptions& options,
            const std::optional<std::string>& input_csv);

/// Fit an existing CE spectrum CSV.
int cmd_fit_ce(const Scenario& scenario, const CommandOptions& options,
               const std::string& input_csv);

/// Generate pairs, run the detection chain, export the time-tag stream.
int cmd_pairs(const Scenario& scenario, const CommandOptions& options);

/// Correlate a tag file (.bin or .csv) into a histogram + CAR/PCR summary.
int cmd_correlate(const Scenario& scenario, const CommandOptions& options,
                  const std::string& tag_file);

/// CAR-vs-power scan with the inverse-law fit.
int cmd_car_scan(const Scenario& scenario, const CommandOptions& options);

/// Three-peak histograms (constructive + destructive) and the fringe scan
/// with the visibility fit.
int cmd_franson(const Scenario& scenario, const CommandOptions& options);

/// Fit a fringe CSV produced by cmd_franson (or compatible).
int cmd_fringe_fit(const Scenario& scenario, const CommandOptions& options,
                   const std::string& fringe_csv);

/// Fast analytic-vs-Monte-Carlo consistency checks; prints one line per
/// check, returns nonzero if any fails.
int cmd_selftest(const Scenario& scenario, const CommandOptions& options);

}  // namespace spdcsim
