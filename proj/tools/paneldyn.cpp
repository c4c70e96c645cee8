// Command-line front end: ingest -> features -> fit -> analyze-surface ->
// diagnostics, plus simulate and the all-in-one report command.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "paneldyn/errors.hpp"
#include "paneldyn/pipeline.hpp"

namespace {

using paneldyn::RunConfig;

struct PendingOption {
  std::string key;
  std::string value;
};

/// Flag values are staged and applied after the config file so that
/// command-line options always win.
class OptionStage {
 public:
  void stage(const std::string& key, const std::string& value) {
    pending_.push_back({key, value});
  }
  void apply(RunConfig& config) const {
    for (const auto& option : pending_)
      paneldyn::apply_key_value(config, option.key, option.value);
  }

 private:
  std::vector<PendingOption> pending_;
};

void add_common_options(CLI::App* cmd, OptionStage& stage, std::string& config_path) {
  cmd->add_option("--config", config_path, "flat key=value config file");
  auto relay = [&stage](const std::string& key) {
    return [&stage, key](const std::string& value) { stage.stage(key, value); };
  };
  cmd->add_option_function<std::string>("--out", relay("out"), "output directory");
  cmd->add_option_function<std::string>("--threads", relay("threads"),
                                        "worker threads (PANELDYN_THREADS as fallback)");
  cmd->add_option_function<std::string>("--panel", relay("panel"), "firm CSV path");
  cmd->add_option_function<std::string>("--macro", relay("macro"), "macro CSV path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panel price-dynamics toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  OptionStage stage;

  auto relay = [&stage](const std::string& key) {
    return [&stage, key](const std::string& value) { stage.stage(key, value); };
  };

  CLI::App* ingest = app.add_subcommand("ingest", "validate a panel and emit summary stats");
  add_common_options(ingest, stage, config_path);

  CLI::App* features = app.add_subcommand("features", "build the factor matrix");
  add_common_options(features, stage, config_path);
  features->add_option_function<std::string>("--warmup-days", relay("warmup_days"),
                                             "leading days excluded before the first row");
  features->add_option_function<std::string>("--blend-forecasts", relay("blend_forecasts"),
                                             "day-weighted FY1/FY2 blend (true/false)");

  CLI::App* fit = app.add_subcommand("fit", "fit one or more models");
  add_common_options(fit, stage, config_path);
  fit->add_option_function<std::string>("--model", relay("models"),
                                        "model ids, comma separated (1V,1T,2,2X,3,4)");
  fit->add_option_function<std::string>("--features", relay("features"),
                                        "precomputed features CSV");
  fit->add_flag_callback("--no-winsorize", [&stage] { stage.stage("winsorize", "false"); },
                         "skip winsorization");
  fit->add_option_function<std::string>("--cov", relay("cov"),
                                        "covariance estimator: cluster or dm3");

  CLI::App* surface = app.add_subcommand("analyze-surface",
                                         "reduce a saved fit to the cubic surface");
  add_common_options(surface, stage, config_path);
  surface->add_option_function<std::string>("--from-report", relay("report"),
                                            "saved report CSV");
  surface->add_option_function<std::string>("--model", relay("models"),
                                            "model id inside the report (default 3)");
  surface->add_option_function<std::string>("--alpha", relay("alpha"),
                                            "significance cutoff (default 0.10)");
  surface->add_option_function<std::string>("--grid", relay("grid"),
                                            "vmin:vmax:steps,tmin:tmax:steps");
  surface->add_option_function<std::string>("--level", relay("level"),
                                            "solve for trend values attaining this return");

  CLI::App* diagnostics = app.add_subcommand("diagnostics", "residual distribution checks");
  add_common_options(diagnostics, stage, config_path);
  diagnostics->add_option_function<std::string>("--residuals", relay("residuals"),
                                                "residuals CSV (firm,date,residual)");
  diagnostics->add_option_function<std::string>("--sd", relay("sd"),
                                                "fixed Gaussian reference SD");

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic raw panel");
  add_common_options(simulate, stage, config_path);
  simulate->add_option_function<std::string>("--seed", relay("seed"), "RNG seed");
  simulate->add_option_function<std::string>("--n-firms", relay("n_firms"), "firm count");
  simulate->add_option_function<std::string>("--n-days", relay("n_days"), "day count");

  CLI::App* report = app.add_subcommand(
      "report", "full chain: fit all models, surface analysis, diagnostics");
  add_common_options(report, stage, config_path);
  report->add_flag_callback("--no-winsorize", [&stage] { stage.stage("winsorize", "false"); },
                            "skip winsorization");
  report->add_option_function<std::string>("--cov", relay("cov"),
                                           "covariance estimator: cluster or dm3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) paneldyn::apply_config_file(config, config_path);
    stage.apply(config);

    std::string output;
    if (ingest->parsed()) output = paneldyn::cmd_ingest(config);
    else if (features->parsed()) output = paneldyn::cmd_features(config);
    else if (fit->parsed()) output = paneldyn::cmd_fit(config);
    else if (surface->parsed()) output = paneldyn::cmd_analyze_surface(config);
    else if (diagnostics->parsed()) output = paneldyn::cmd_diagnostics(config);
    else if (simulate->parsed()) output = paneldyn::cmd_simulate(config);
    else if (report->parsed()) output = paneldyn::cmd_report(config);
    std::cout << output;
    return 0;
  } catch (const paneldyn::Error& e) {
    std::cerr << e.code_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return 1;
  }
}
