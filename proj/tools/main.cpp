#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spdcsim/commands.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spdcsim - quasi-phase-matched SPDC pair-source simulator and analysis toolkit"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<uint64_t> seed_override;
  spdcsim::CommandOptions options;
  app.add_option("--scenario", scenario_path, "Scenario JSON file (defaults used when omitted)");
  app.add_option("--seed", seed_override, "Override the scenario seed");
  app.add_option("--out", options.out_dir, "Output directory")->default_val(".");
  app.add_option("--format", options.format, "Tag export format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");

  auto* shg = app.add_subcommand("shg", "Synthesize a CE spectrum and fit the QPM model");
  std::string shg_input;
  shg->add_option("--input", shg_input, "Measured CE spectrum CSV to ingest instead");

  auto* fit_ce = app.add_subcommand("fit-ce", "Fit an existing CE spectrum CSV");
  std::string fit_ce_input;
  fit_ce->add_option("input", fit_ce_input, "CE spectrum CSV")->required();

  auto* pairs = app.add_subcommand("pairs", "Generate pairs and export detector time tags");

  auto* correlate = app.add_subcommand("correlate", "Histogram + CAR/PCR from a tag file");
  std::string tag_file;
  correlate->add_option("input", tag_file, "Tag file (.bin or .csv)")->required();

  auto* car_scan = app.add_subcommand("car-scan", "CAR vs power scan with inverse-law fit");
  auto* franson = app.add_subcommand("franson", "Franson histograms, fringe scan, visibility");

  auto* fringe_fit = app.add_subcommand("fringe-fit", "Fit a fringe CSV");
  std::string fringe_csv;
  fringe_fit->add_option("input", fringe_csv, "Fringe CSV (offset_pm,central_counts,...)")
      ->required();

  auto* selftest = app.add_subcommand("selftest", "Run analytic-vs-Monte-Carlo checks");

  CLI11_PARSE(app, argc, argv);

  try {
    spdcsim::Scenario scenario =
        scenario_path.empty() ? spdcsim::Scenario{} : spdcsim::load_scenario(scenario_path);
    if (seed_override) scenario.seed = *seed_override;
    scenario.validate();

    if (shg->parsed()) {
      return spdcsim::cmd_shg(scenario, options,
                              shg_input.empty() ? std::nullopt
                                                : std::optional<std::string>(shg_input));
    }
    if (fit_ce->parsed()) return spdcsim::cmd_fit_ce(scenario, options, fit_ce_input);
    if (pairs->parsed()) return spdcsim::cmd_pairs(scenario, options);
    if (correlate->parsed()) return spdcsim::cmd_correlate(scenario, options, tag_file);
    if (car_scan->parsed()) return spdcsim::cmd_car_scan(scenario, options);
    if (franson->parsed()) return spdcsim::cmd_franson(scenario, options);
    if (fringe_fit->parsed()) return spdcsim::cmd_fringe_fit(scenario, options, fringe_csv);
    if (selftest->parsed()) return spdcsim::cmd_selftest(scenario, options);
  } catch (const spdcsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
