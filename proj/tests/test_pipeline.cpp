#include <doctest.h>

#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/pipeline.hpp"

using namespace paneldyn;
namespace fs = std::filesystem;

namespace {

/// Scratch directory, removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("paneldyn_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path.string() : (path / name).string();
  }
  static inline int counter = 0;
};

RunConfig small_sim_config(const std::string& out) {
  RunConfig config;
  config.out_dir = out;
  config.sim.n_firms = 4;
  config.sim.n_days = 400;  // long enough for occasional resistance flags
  config.sim.seed = 77;
  return config;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config file parsing, overrides, and unknown keys") {
  TempDir tmp;
  const std::string cfg_path = tmp.str("run.cfg");
  write_text_file(cfg_path,
                  "# comment line\n"
                  "panel=/data/p.csv\n"
                  "vol_long = 100  # trailing comment\n"
                  "winsorize=false\n"
                  "cov=dm3\n"
                  "model=1V,3\n");
  RunConfig config;
  apply_config_file(config, cfg_path);
  CHECK(config.panel_path == "/data/p.csv");
  CHECK(config.factors.vol_long == 100);
  CHECK_FALSE(config.prep.winsorize_enabled);
  CHECK(config.fe.cov == CovEstimator::dm3);
  CHECK(config.models == std::vector<std::string>{"1V", "3"});

  // Flag-style override wins by being applied afterwards.
  apply_key_value(config, "cov", "cluster");
  CHECK(config.fe.cov == CovEstimator::cluster);

  apply_key_value(config, "grid", "-2:2:41,-3:3:61");
  CHECK(config.grid.vmin == -2.0);
  CHECK(config.grid.vsteps == 41);
  CHECK(config.grid.tmax == 3.0);
  CHECK(config.grid.tsteps == 61);
  CHECK_THROWS_AS(apply_key_value(config, "grid", "1:2"), Error);

  CHECK_THROWS_AS(apply_key_value(config, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_key_value(config, "vol_long", "many"), Error);
}

TEST_CASE("simulate writes loadable panel and macro files") {
  TempDir tmp;
  const RunConfig config = small_sim_config(tmp.str());
  cmd_simulate(config);
  CHECK(fs::exists(tmp.path / "panel.csv"));
  CHECK(fs::exists(tmp.path / "macro.csv"));
  const PanelDataset data =
      load_panel_files(tmp.str("panel.csv"), tmp.str("macro.csv"));
  CHECK(data.n_firms() == 4);
  CHECK(data.n_days() == 400);
}

TEST_CASE("full command chain over files") {
  TempDir tmp;
  cmd_simulate(small_sim_config(tmp.str("sim")));

  RunConfig config;
  config.panel_path = tmp.str("sim") + "/panel.csv";
  config.macro_path = tmp.str("sim") + "/macro.csv";
  config.out_dir = tmp.str("out");
  config.threads = 2;

  const std::string ingest_text = cmd_ingest(config);
  CHECK(ingest_text.find("4 firms") != std::string::npos);
  CHECK(fs::exists(fs::path(config.out_dir) / "summary.csv"));

  cmd_features(config);
  CHECK(fs::exists(fs::path(config.out_dir) / "features.csv"));

  // Fit from the precomputed features file.
  RunConfig fit_config;
  fit_config.features_path = (fs::path(config.out_dir) / "features.csv").string();
  fit_config.out_dir = tmp.str("fit");
  fit_config.models = {"3"};
  fit_config.emit_design = true;
  fit_config.cov_diagnostics = true;
  cmd_fit(fit_config);
  CHECK(fs::exists(fs::path(fit_config.out_dir) / "report_model3.csv"));
  CHECK(fs::exists(fs::path(fit_config.out_dir) / "residuals_model3.csv"));
  const std::string design =
      read_text_file((fs::path(fit_config.out_dir) / "design_model3.csv").string());
  CHECK(design.find("firm,date,valuation,valuation_sq,valuation_cu,trend,") == 0);
  const std::string se_cmp = read_text_file(
      (fs::path(fit_config.out_dir) / "se_comparison_model3.csv").string());
  CHECK(se_cmp.find("term,coefficient,se_cluster,se_dm3") == 0);

  // Surface analysis from the saved report.
  RunConfig surf_config;
  surf_config.report_path = (fs::path(fit_config.out_dir) / "report_model3.csv").string();
  surf_config.out_dir = tmp.str("surf");
  surf_config.surface_alpha = 0.99;  // noisy small fixture: keep whatever is there
  surf_config.level_target = 0.0;
  cmd_analyze_surface(surf_config);
  CHECK(fs::exists(fs::path(surf_config.out_dir) / "surface.json"));
  CHECK(fs::exists(fs::path(surf_config.out_dir) / "surface_grid.csv"));
  CHECK(fs::exists(fs::path(surf_config.out_dir) / "cross_trend0.csv"));
  CHECK(fs::exists(fs::path(surf_config.out_dir) / "cross_valuation0.csv"));
  const std::string json = read_text_file(surf_config.out_dir + "/surface.json");
  CHECK(json.find("level_roots") != std::string::npos);

  // Diagnostics from the residual file.
  RunConfig diag_config;
  diag_config.residuals_path =
      (fs::path(fit_config.out_dir) / "residuals_model3.csv").string();
  diag_config.out_dir = tmp.str("diag");
  const std::string diag_text = cmd_diagnostics(diag_config);
  CHECK(diag_text.find("normality_correlation=") == 0);
  CHECK(fs::exists(fs::path(diag_config.out_dir) / "diagnostics.csv"));
}

TEST_CASE("report produces the full artifact set") {
  TempDir tmp;
  cmd_simulate(small_sim_config(tmp.str("sim")));
  RunConfig config;
  config.panel_path = tmp.str("sim") + "/panel.csv";
  config.macro_path = tmp.str("sim") + "/macro.csv";
  config.out_dir = tmp.str("rep");
  const std::string text = cmd_report(config);
  CHECK(text.find("Model 1V") != std::string::npos);
  CHECK(text.find("Model 4") != std::string::npos);
  for (const char* name :
       {"table2.txt", "table2.csv", "summary.csv", "residuals_model3.csv",
        "surface.json", "surface_grid.csv", "diagnostics.csv", "normality.txt"})
    CHECK(fs::exists(fs::path(config.out_dir) / name));
}

TEST_CASE("property: report output bytes are identical across thread counts") {
  TempDir tmp;
  cmd_simulate(small_sim_config(tmp.str("sim")));
  RunConfig config;
  config.panel_path = tmp.str("sim") + "/panel.csv";
  config.macro_path = tmp.str("sim") + "/macro.csv";

  config.out_dir = tmp.str("rep1");
  config.threads = 1;
  cmd_report(config);
  config.out_dir = tmp.str("rep8");
  config.threads = 8;
  cmd_report(config);

  for (const char* name : {"table2.txt", "table2.csv", "surface.json",
                           "residuals_model3.csv", "diagnostics.csv"}) {
    const std::string a = read_text_file(tmp.str("rep1") + "/" + std::string(name));
    const std::string b = read_text_file(tmp.str("rep8") + "/" + std::string(name));
    CHECK(a == b);
  }
}

TEST_CASE("missing inputs surface as InvalidConfig") {
  RunConfig config;
  CHECK_THROWS_AS(cmd_ingest(config), Error);
  CHECK_THROWS_AS(cmd_analyze_surface(config), Error);
  CHECK_THROWS_AS(cmd_diagnostics(config), Error);
}

}  // TEST_SUITE
