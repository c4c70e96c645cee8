#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paneldyn/diagnostics.hpp"
#include "paneldyn/factors.hpp"
#include "paneldyn/models.hpp"
#include "paneldyn/panel.hpp"
#include "paneldyn/surface.hpp"
#include "paneldyn/synth.hpp"

namespace paneldyn {

/// One bag of options for every command. A flat key=value config file maps
/// onto these fields; command-line flags override file values.
struct RunConfig {
  std::string panel_path;
  std::string macro_path;
  std::string features_path;   // precomputed features (skips the factor pass)
  std::string report_path;     // saved fit, input of analyze-surface
  std::string residuals_path;  // input of diagnostics
  std::string out_dir = ".";

  PanelSchema schema;
  FactorConfig factors;
  PrepConfig prep;
  FEOptions fe;

  std::vector<std::string> models = {"3"};
  bool emit_design = false;      // fit also writes the prepared design matrix
  bool cov_diagnostics = false;  // fit also writes both SE estimators side by side
  double surface_alpha = 0.10;
  GridSpec grid;
  std::optional<double> level_target;
  std::optional<double> diagnostics_sd;

  synth::RawSynthConfig sim;
  int threads = 0;  // 0: PANELDYN_THREADS, then hardware
};

/// Apply `key=value` (the config-file grammar). InvalidConfig on unknown
/// keys or malformed values.
void apply_key_value(RunConfig& config, const std::string& key, const std::string& value);

/// Read a flat config file: one key=value per line, '#' comments.
void apply_config_file(RunConfig& config, const std::string& path);

// Command bodies. Each writes its artifacts under config.out_dir and
// returns the text printed to stdout by the CLI.
std::string cmd_ingest(const RunConfig& config);
std::string cmd_features(const RunConfig& config);
std::string cmd_fit(const RunConfig& config);
std::string cmd_analyze_surface(const RunConfig& config);
std::string cmd_diagnostics(const RunConfig& config);
std::string cmd_simulate(const RunConfig& config);
std::string cmd_report(const RunConfig& config);

}  // namespace paneldyn
