#include "paneldyn/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/parallel.hpp"

namespace paneldyn {

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  raise(errc::invalid_config, "key '" + key + "': expected a boolean, got '" + value + "'");
}

double parse_double_opt(const std::string& value, const std::string& key) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    raise(errc::invalid_config, "key '" + key + "': expected a number, got '" + value + "'");
  }
}

int parse_int_opt(const std::string& value, const std::string& key) {
  const double v = parse_double_opt(value, key);
  return static_cast<int>(v);
}

GridSpec parse_grid(const std::string& text) {
  GridSpec spec;
  const auto parse_axis = [&](const std::string& axis, double& lo, double& hi, int& steps) {
    std::istringstream in(axis);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c))
      raise(errc::invalid_config, "grid axis '" + axis + "' is not min:max:steps");
    lo = parse_double_opt(a, "grid");
    hi = parse_double_opt(b, "grid");
    steps = parse_int_opt(c, "grid");
  };
  const size_t comma = text.find(',');
  if (comma == std::string::npos)
    raise(errc::invalid_config, "grid must be vmin:vmax:steps,tmin:tmax:steps");
  parse_axis(text.substr(0, comma), spec.vmin, spec.vmax, spec.vsteps);
  parse_axis(text.substr(comma + 1), spec.tmin, spec.tmax, spec.tsteps);
  return spec;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void ensure_out_dir(const RunConfig& config) {
  if (config.out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) raise(errc::io_failure, "cannot create output directory '" + config.out_dir + "'");
}

std::string out_path(const RunConfig& config, const std::string& name) {
  if (config.out_dir.empty()) return name;
  return (std::filesystem::path(config.out_dir) / name).string();
}

PanelDataset load_input_panel(const RunConfig& config) {
  if (config.panel_path.empty() || config.macro_path.empty())
    raise(errc::invalid_config, "this command needs panel= and macro= inputs");
  return load_panel_files(config.panel_path, config.macro_path, config.schema);
}

FeatureMatrix obtain_features(const RunConfig& config) {
  if (!config.features_path.empty()) return parse_features_csv_file(config.features_path);
  const PanelDataset data = load_input_panel(config);
  return build_features(data, config.factors, resolve_threads(config.threads));
}

std::string render_residuals_csv(const FeatureMatrix& features, const FEFit& fit) {
  std::string out = "firm,date,residual\n";
  for (int i = 0; i < features.n_firms(); ++i) {
    for (int r = 0; r < features.days_per_firm; ++r) {
      out += features.firms[i];
      out += ',';
      out += features.day_labels[r];
      out += ',';
      out += format_double(fit.residuals(features.idx(i, r)));
      out += '\n';
    }
  }
  return out;
}

std::string surface_outputs(const RunConfig& config, const RegressionReport& report) {
  CubicSurface surface;
  try {
    surface = reduce_surface(report, config.surface_alpha);
  } catch (const Error& e) {
    // Nothing significant: record that instead of failing the whole run.
    if (e.code() != errc::no_significant_terms) throw;
    const std::string json = std::string("{\n  \"error\": \"") + e.code_name() +
                             "\",\n  \"message\": \"" + e.what() + "\"\n}\n";
    write_text_file(out_path(config, "surface.json"), json);
    for (const char* name : {"surface_grid.csv", "cross_trend0.csv", "cross_valuation0.csv"})
      write_text_file(out_path(config, name), "valuation,trend,return\n");
    return json;
  }

  std::optional<TrendGeometry> geometry;
  try {
    geometry = trend_geometry(surface, 0.0);
  } catch (const Error& e) {
    if (e.code() != errc::no_interior_extrema) throw;
  }
  std::string json = geometry_json(surface, geometry ? &*geometry : nullptr);
  if (config.level_target) {
    const auto roots = level_set_roots(surface, 0.0, *config.level_target);
    std::string root_text = "\"level_roots\": [";
    for (size_t j = 0; j < roots.size(); ++j) {
      if (j) root_text += ", ";
      root_text += format_double(roots[j]);
    }
    root_text += "]";
    // splice into the object: replace the final "}\n"
    json.erase(json.rfind('\n'));
    json.erase(json.rfind('\n'));
    json += ",\n  " + root_text + "\n}\n";
  }
  write_text_file(out_path(config, "surface.json"), json);
  write_text_file(out_path(config, "surface_grid.csv"), grid_csv(surface, config.grid));
  GridSpec cross_v = config.grid;
  cross_v.tsteps = 1;
  cross_v.tmin = cross_v.tmax = 0.0;
  write_text_file(out_path(config, "cross_trend0.csv"), grid_csv(surface, cross_v));
  GridSpec cross_t = config.grid;
  cross_t.vsteps = 1;
  cross_t.vmin = cross_t.vmax = 0.0;
  write_text_file(out_path(config, "cross_valuation0.csv"), grid_csv(surface, cross_t));
  return json;
}

std::string diagnostics_outputs(const RunConfig& config,
                                std::span<const double> residuals) {
  const QuantileComparison cmp = quantile_compare(residuals, config.diagnostics_sd);
  write_text_file(out_path(config, "diagnostics.csv"), render_quantile_csv(cmp));
  const double corr = normality_correlation(residuals);
  const std::string line = "normality_correlation=" + format_double(corr) + "\n";
  write_text_file(out_path(config, "normality.txt"), line);
  return line;
}

}  // namespace

void apply_key_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "panel") c.panel_path = value;
  else if (key == "macro") c.macro_path = value;
  else if (key == "features") c.features_path = value;
  else if (key == "report") c.report_path = value;
  else if (key == "residuals") c.residuals_path = value;
  else if (key == "out") c.out_dir = value;
  else if (key == "threads") c.threads = parse_int_opt(value, key);
  else if (key == "model" || key == "models") c.models = split_list(value);
  else if (key == "winsorize") c.prep.winsorize_enabled = parse_bool(value, key);
  else if (key == "winsorize_lower") c.prep.lower_pct = parse_double_opt(value, key);
  else if (key == "winsorize_upper") c.prep.upper_pct = parse_double_opt(value, key);
  else if (key == "winsorize_pooled") c.prep.per_firm_quantiles = !parse_bool(value, key);
  else if (key == "standardize") c.prep.standardize_enabled = parse_bool(value, key);
  else if (key == "cov") {
    if (value == "cluster") c.fe.cov = CovEstimator::cluster;
    else if (value == "dm3") c.fe.cov = CovEstimator::dm3;
    else raise(errc::invalid_config, "cov must be 'cluster' or 'dm3'");
  } else if (key == "hc_divisor") {
    if (value == "paper_plus") c.fe.hc_divisor = HcDivisor::paper_plus;
    else if (value == "hc3_minus") c.fe.hc_divisor = HcDivisor::hc3_minus;
    else raise(errc::invalid_config, "hc_divisor must be 'paper_plus' or 'hc3_minus'");
  }
  else if (key == "alpha") c.surface_alpha = parse_double_opt(value, key);
  else if (key == "grid") c.grid = parse_grid(value);
  else if (key == "level") c.level_target = parse_double_opt(value, key);
  else if (key == "sd") c.diagnostics_sd = parse_double_opt(value, key);
  else if (key == "significance_alpha") c.factors.significance_alpha = parse_double_opt(value, key);
  else if (key == "val_window") c.factors.val_window = parse_int_opt(value, key);
  else if (key == "window_includes_t") c.factors.window_includes_t = parse_bool(value, key);
  else if (key == "trend_lookback") c.factors.trend_lookback = parse_int_opt(value, key);
  else if (key == "vol_short") c.factors.vol_short = parse_int_opt(value, key);
  else if (key == "vol_long") c.factors.vol_long = parse_int_opt(value, key);
  else if (key == "ltt_window") c.factors.ltt_window = parse_int_opt(value, key);
  else if (key == "volume_lookback") c.factors.volume_lookback = parse_int_opt(value, key);
  else if (key == "resistance_threshold") c.factors.resistance_threshold = parse_double_opt(value, key);
  else if (key == "res_high_start") c.factors.res_high_start = parse_int_opt(value, key);
  else if (key == "res_high_end") c.factors.res_high_end = parse_int_opt(value, key);
  else if (key == "res_dip_start") c.factors.res_dip_start = parse_int_opt(value, key);
  else if (key == "res_dip_end") c.factors.res_dip_end = parse_int_opt(value, key);
  else if (key == "emit_design") c.emit_design = parse_bool(value, key);
  else if (key == "cov_diagnostics") c.cov_diagnostics = parse_bool(value, key);
  else if (key == "warmup_days") c.factors.warmup_days = parse_int_opt(value, key);
  else if (key == "blend_forecasts") c.factors.blend_forecasts = parse_bool(value, key);
  else if (key == "seed") c.sim.seed = static_cast<uint64_t>(parse_double_opt(value, key));
  else if (key == "n_firms") c.sim.n_firms = parse_int_opt(value, key);
  else if (key == "n_days") c.sim.n_days = parse_int_opt(value, key);
  else if (key == "start_date") c.sim.start_date = value;
  else if (key == "price_drift") c.sim.price_drift = parse_double_opt(value, key);
  else if (key == "price_vol") c.sim.price_vol = parse_double_opt(value, key);
  else if (key == "turnover_vol") c.sim.turnover_vol = parse_double_opt(value, key);
  else if (key == "eps_revision_prob") c.sim.eps_revision_prob = parse_double_opt(value, key);
  else if (key == "gdp_revision_prob") c.sim.gdp_revision_prob = parse_double_opt(value, key);
  else if (key == "cubic_feedback") c.sim.cubic_feedback = parse_double_opt(value, key);
  else if (key == "emit_eps_fy2") c.sim.emit_eps_fy2 = parse_bool(value, key);
  else if (key == "emit_gdp_fy2") c.sim.emit_gdp_fy2 = parse_bool(value, key);
  else if (key == "emit_mktcap") c.sim.emit_mktcap = parse_bool(value, key);
  else if (key == "col_date") c.schema.date = value;
  else if (key == "col_ticker") c.schema.ticker = value;
  else if (key == "col_close") c.schema.adj_close = value;
  else if (key == "col_turnover") c.schema.turnover = value;
  else if (key == "col_eps_fy1") c.schema.eps_fy1 = value;
  else if (key == "col_eps_fy2") c.schema.eps_fy2 = value;
  else if (key == "col_mktcap") c.schema.mktcap = value;
  else if (key == "col_spx") c.schema.spx = value;
  else if (key == "col_ust10y") c.schema.ust10y = value;
  else if (key == "col_gdp_fy1") c.schema.gdp_fy1 = value;
  else if (key == "col_gdp_fy2") c.schema.gdp_fy2 = value;
  else raise(errc::invalid_config, "unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open config '" + path + "'");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; };
    while (!line.empty() && is_space(line.front())) line.erase(line.begin());
    while (!line.empty() && is_space(line.back())) line.pop_back();
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      raise(errc::invalid_config,
            path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [&](std::string text) {
      while (!text.empty() && is_space(text.front())) text.erase(text.begin());
      while (!text.empty() && is_space(text.back())) text.pop_back();
      return text;
    };
    apply_key_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string cmd_ingest(const RunConfig& config) {
  ensure_out_dir(config);
  const PanelDataset data = load_input_panel(config);
  const PanelSummary summary = summarize(data);
  const std::string csv = render_summary_csv(summary);
  write_text_file(out_path(config, "summary.csv"), csv);
  std::string text = "panel: " + std::to_string(data.n_firms()) + " firms x " +
                     std::to_string(data.n_days()) + " days = " +
                     std::to_string(data.size()) + " records\n";
  text += csv;
  return text;
}

std::string cmd_features(const RunConfig& config) {
  ensure_out_dir(config);
  const FeatureMatrix features = obtain_features(config);
  write_text_file(out_path(config, "features.csv"), render_features_csv(features));
  return "features: " + std::to_string(features.rows()) + " rows (" +
         std::to_string(features.n_firms()) + " firms x " +
         std::to_string(features.days_per_firm) + " days)\n";
}

std::string cmd_fit(const RunConfig& config) {
  ensure_out_dir(config);
  const FeatureMatrix features = obtain_features(config);
  const FitOptions options{config.prep, config.fe};
  std::string text;
  for (const std::string& id_text : config.models) {
    const ModelId id = parse_model_id(id_text);
    const ModelFit fit = fit_model(id, features, options);
    const std::string tag = std::string("model") + model_name(id);
    write_text_file(out_path(config, "report_" + tag + ".csv"),
                    render_report_csv(fit.report));
    write_text_file(out_path(config, "report_" + tag + ".txt"),
                    render_table_text({fit.report}));
    write_text_file(out_path(config, "residuals_" + tag + ".csv"),
                    render_residuals_csv(features, fit.fe));
    if (config.emit_design) {
      const FeatureMatrix prepared = prepare(features, config.prep);
      const Eigen::MatrixXd x = polynomial_expand(prepared, id);
      const auto& terms = model_terms(id);
      std::string csv = "firm,date";
      for (const auto& term : terms) csv += "," + term;
      csv += ",target\n";
      for (int i = 0; i < prepared.n_firms(); ++i) {
        for (int r = 0; r < prepared.days_per_firm; ++r) {
          const size_t row = prepared.idx(i, r);
          csv += prepared.firms[i];
          csv += ',';
          csv += prepared.day_labels[r];
          for (Eigen::Index j = 0; j < x.cols(); ++j) {
            csv += ',';
            csv += format_double(x(static_cast<Eigen::Index>(row), j));
          }
          csv += ',';
          csv += format_double(prepared.target[row]);
          csv += '\n';
        }
      }
      write_text_file(out_path(config, "design_" + tag + ".csv"), csv);
    }
    if (config.cov_diagnostics) {
      // Both robust estimators side by side.
      FitOptions alt = options;
      alt.fe.cov = options.fe.cov == CovEstimator::cluster ? CovEstimator::dm3
                                                           : CovEstimator::cluster;
      const ModelFit other = fit_model(id, features, alt);
      const RegressionReport& clustered =
          options.fe.cov == CovEstimator::cluster ? fit.report : other.report;
      const RegressionReport& dm3 =
          options.fe.cov == CovEstimator::cluster ? other.report : fit.report;
      std::string csv = "term,coefficient,se_cluster,se_dm3\n";
      for (size_t j = 0; j < clustered.rows.size(); ++j) {
        csv += clustered.rows[j].term;
        csv += ',';
        csv += format_double(clustered.rows[j].coefficient);
        csv += ',';
        csv += format_double(clustered.rows[j].se);
        csv += ',';
        csv += format_double(dm3.rows[j].se);
        csv += '\n';
      }
      write_text_file(out_path(config, "se_comparison_" + tag + ".csv"), csv);
    }
    text += render_table_text({fit.report});
  }
  return text;
}

std::string cmd_analyze_surface(const RunConfig& config) {
  ensure_out_dir(config);
  if (config.report_path.empty())
    raise(errc::invalid_config, "analyze-surface needs report=<saved fit csv>");
  const std::string filter = config.models.empty() ? "3" : config.models.front();
  const RegressionReport report = parse_report_csv_file(config.report_path, filter);
  return surface_outputs(config, report);
}

std::string cmd_diagnostics(const RunConfig& config) {
  ensure_out_dir(config);
  if (config.residuals_path.empty())
    raise(errc::invalid_config, "diagnostics needs residuals=<csv>");
  const CsvTable table = read_csv_file(config.residuals_path);
  const int col = table.require("residual");
  std::vector<double> residuals;
  residuals.reserve(table.rows.size());
  size_t row_no = 1;
  for (const auto& row : table.rows)
    residuals.push_back(parse_number(row[col], ++row_no, "residual"));
  return diagnostics_outputs(config, residuals);
}

std::string cmd_simulate(const RunConfig& config) {
  ensure_out_dir(config);
  const PanelDataset data = synth::generate_raw_panel(config.sim);
  write_text_file(out_path(config, "panel.csv"), render_panel_csv(data));
  write_text_file(out_path(config, "macro.csv"), render_macro_csv(data));
  return "simulated: " + std::to_string(data.n_firms()) + " firms x " +
         std::to_string(data.n_days()) + " days\n";
}

std::string cmd_report(const RunConfig& config) {
  ensure_out_dir(config);
  const PanelDataset data = load_input_panel(config);
  write_text_file(out_path(config, "summary.csv"),
                  render_summary_csv(summarize(data)));
  const FeatureMatrix features =
      build_features(data, config.factors, resolve_threads(config.threads));

  const FitOptions options{config.prep, config.fe};
  std::vector<RegressionReport> reports;
  std::optional<ModelFit> model3;
  for (ModelId id : {ModelId::m1v, ModelId::m1t, ModelId::m2, ModelId::m3, ModelId::m4}) {
    ModelFit fit = fit_model(id, features, options);
    if (id == ModelId::m3) model3 = fit;
    reports.push_back(std::move(fit.report));
  }
  const std::string table_text = render_table_text(reports);
  write_text_file(out_path(config, "table2.txt"), table_text);
  write_text_file(out_path(config, "table2.csv"), render_table_csv(reports));

  write_text_file(out_path(config, "residuals_model3.csv"),
                  render_residuals_csv(features, model3->fe));
  surface_outputs(config, model3->report);
  std::vector<double> residuals(model3->fe.residuals.data(),
                                model3->fe.residuals.data() + model3->fe.residuals.size());
  diagnostics_outputs(config, residuals);
  return table_text;
}

}  // namespace paneldyn
