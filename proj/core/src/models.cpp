#include "paneldyn/models.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string star_text(int stars) { return std::string(stars, '*'); }

}  // namespace

const CoefficientRow* RegressionReport::find(const std::string& term) const {
  for (const auto& row : rows)
    if (row.term == term) return &row;
  return nullptr;
}

double robust_p_value(double t_abs, int n_clusters) {
  if (n_clusters >= 30) return 2.0 * (1.0 - normal_cdf(std::fabs(t_abs)));
  return student_t_two_sided_p(std::fabs(t_abs), std::max(1, n_clusters - 1));
}

int stars_for_p(double p) {
  if (p < 0.01) return 3;
  if (p < 0.05) return 2;
  if (p < 0.10) return 1;
  return 0;
}

ModelFit fit_model(ModelId id, const FeatureMatrix& features, const FitOptions& options) {
  const FeatureMatrix prepared = prepare(features, options.prep);
  const Eigen::MatrixXd x = polynomial_expand(prepared, id);
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(prepared.target.data(), prepared.target.size());
  const PanelShape shape{prepared.n_firms(), prepared.days_per_firm};

  ModelFit out{.report = {}, .fe = fit_two_way_fe(x, y, shape, options.fe)};
  RegressionReport& report = out.report;
  report.model = id;
  report.n_obs = out.fe.n_obs;
  report.n_firms = out.fe.n_firms;
  report.n_days = out.fe.n_days;
  report.intercept = report_intercept(out.fe);
  report.theil_r2 = out.fe.theil;
  report.f_no_fixed_effects = out.fe.f_no_fixed_effects;
  report.f_stars = stars_for_p(out.fe.f_no_fixed_effects.p_value);

  const auto& terms = model_terms(id);
  report.rows.reserve(terms.size());
  for (size_t j = 0; j < terms.size(); ++j) {
    CoefficientRow row;
    row.term = terms[j];
    row.display = term_display_name(terms[j]);
    row.coefficient = out.fe.beta(static_cast<Eigen::Index>(j));
    row.se = out.fe.se(static_cast<Eigen::Index>(j));
    row.t_value = out.fe.t_values(static_cast<Eigen::Index>(j));
    row.p_value = robust_p_value(std::fabs(row.t_value), report.n_firms);
    row.stars = stars_for_p(row.p_value);
    report.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<RegressionReport> run_table2(const FeatureMatrix& features,
                                         const FitOptions& options) {
  std::vector<RegressionReport> reports;
  for (ModelId id : {ModelId::m1v, ModelId::m1t, ModelId::m2, ModelId::m3, ModelId::m4})
    reports.push_back(fit_model(id, features, options).report);
  return reports;
}

std::string render_table_text(const std::vector<RegressionReport>& reports) {
  // Row universe in the canonical full-model order, then any extras
  // (e.g. the Model-2X interaction) in first appearance order.
  std::vector<std::string> all_terms;
  auto present = [&](const std::string& term) {
    for (const auto& rep : reports)
      if (rep.find(term)) return true;
    return false;
  };
  for (const auto& term : model_terms(ModelId::m4))
    if (present(term)) all_terms.push_back(term);
  for (const auto& rep : reports)
    for (const auto& row : rep.rows)
      if (std::find(all_terms.begin(), all_terms.end(), row.term) == all_terms.end())
        all_terms.push_back(row.term);

  const int label_w = 28;
  const int col_w = 18;
  std::string out;
  auto pad = [&](std::string text, int width) {
    if (static_cast<int>(text.size()) < width)
      text.append(width - text.size(), ' ');
    return text;
  };
  out += pad("", label_w);
  for (const auto& rep : reports) out += pad(std::string("Model ") + model_name(rep.model), col_w);
  out += '\n';

  for (const auto& term : all_terms) {
    std::string coef_line = pad(term_display_name(term), label_w);
    std::string se_line = pad("", label_w);
    for (const auto& rep : reports) {
      const CoefficientRow* row = rep.find(term);
      if (!row) {
        coef_line += pad("", col_w);
        se_line += pad("", col_w);
      } else {
        coef_line += pad(fixed(row->coefficient * 1000.0, 3) + star_text(row->stars), col_w);
        se_line += pad("(" + fixed(row->se * 1000.0, 3) + "; " + fixed(row->t_value, 2) + ")",
                       col_w);
      }
    }
    out += coef_line + "\n" + se_line + "\n";
  }

  auto summary_line = [&](const std::string& label, auto fn) {
    std::string line = pad(label, label_w);
    for (const auto& rep : reports) line += pad(fn(rep), col_w);
    out += line + '\n';
  };
  summary_line("Intercept", [&](const RegressionReport& r) {
    return fixed(r.intercept * 1000.0, 4);
  });
  summary_line("R-Square (Theil)", [&](const RegressionReport& r) {
    return fixed(r.theil_r2, 4);
  });
  summary_line("No. Observations", [&](const RegressionReport& r) {
    return std::to_string(r.n_obs);
  });
  summary_line("No. Groups/Firms", [&](const RegressionReport& r) {
    return std::to_string(r.n_firms);
  });
  summary_line("No. Days (per Firm)", [&](const RegressionReport& r) {
    return std::to_string(r.n_days);
  });
  summary_line("F Test for No Fixed Effects", [&](const RegressionReport& r) {
    return fixed(r.f_no_fixed_effects.statistic, 2) + star_text(r.f_stars);
  });
  out +=
      "\nNotes: *, **, *** mark significance at the 90%, 95%, and 99% level.\n"
      "Coefficients and standard errors are multiplied by 1,000; cells show\n"
      "coefficient then (standard error; t-value).\n";
  return out;
}

std::string render_report_csv(const RegressionReport& report) {
  std::string out = "model,term,coefficient,se,t,p,stars\n";
  const std::string name = model_name(report.model);
  for (const auto& row : report.rows) {
    out += name;
    out += ',';
    out += row.term;
    out += ',';
    out += format_double(row.coefficient);
    out += ',';
    out += format_double(row.se);
    out += ',';
    out += format_double(row.t_value);
    out += ',';
    out += format_double(row.p_value);
    out += ',';
    out += std::to_string(row.stars);
    out += '\n';
  }
  auto summary = [&](const std::string& key, const std::string& value) {
    out += name + "," + key + "," + value + ",,,,\n";
  };
  summary("_intercept", format_double(report.intercept));
  summary("_theil_r2", format_double(report.theil_r2));
  summary("_f_stat", format_double(report.f_no_fixed_effects.statistic));
  summary("_f_p", format_double(report.f_no_fixed_effects.p_value));
  summary("_n_obs", std::to_string(report.n_obs));
  summary("_n_firms", std::to_string(report.n_firms));
  summary("_n_days", std::to_string(report.n_days));
  return out;
}

std::string render_table_csv(const std::vector<RegressionReport>& reports) {
  std::string out = "model,term,coefficient,se,t,p,stars\n";
  for (const auto& rep : reports) {
    const std::string body = render_report_csv(rep);
    out += body.substr(body.find('\n') + 1);  // drop the repeated header
  }
  return out;
}

RegressionReport parse_report_csv(std::istream& in, const std::string& model_filter) {
  const CsvTable table = read_csv(in);
  const int c_model = table.require("model");
  const int c_term = table.require("term");
  const int c_coef = table.require("coefficient");
  const int c_se = table.require("se");
  const int c_t = table.require("t");
  const int c_p = table.require("p");
  const int c_stars = table.require("stars");

  RegressionReport report;
  bool model_set = false;
  size_t file_row = 1;
  for (const auto& row : table.rows) {
    ++file_row;
    if (!model_filter.empty() && row[c_model] != model_filter) continue;
    if (!model_set) {
      report.model = parse_model_id(row[c_model]);
      model_set = true;
    } else if (row[c_model] != model_name(report.model)) {
      raise(errc::parse_failure,
            "report file mixes models; pass a model filter to select one");
    }
    const std::string& term = row[c_term];
    if (!term.empty() && term[0] == '_') {
      const double v = row[c_coef].empty() ? 0.0 : parse_number(row[c_coef], file_row, "coefficient");
      if (term == "_intercept") report.intercept = v;
      else if (term == "_theil_r2") report.theil_r2 = v;
      else if (term == "_f_stat") report.f_no_fixed_effects.statistic = v;
      else if (term == "_f_p") report.f_no_fixed_effects.p_value = v;
      else if (term == "_n_obs") report.n_obs = static_cast<int>(v);
      else if (term == "_n_firms") report.n_firms = static_cast<int>(v);
      else if (term == "_n_days") report.n_days = static_cast<int>(v);
      continue;
    }
    CoefficientRow coef;
    coef.term = term;
    coef.display = term_display_name(term);
    coef.coefficient = parse_number(row[c_coef], file_row, "coefficient");
    coef.se = parse_number(row[c_se], file_row, "se");
    coef.t_value = parse_number(row[c_t], file_row, "t");
    coef.p_value = parse_number(row[c_p], file_row, "p");
    coef.stars = static_cast<int>(parse_number(row[c_stars], file_row, "stars"));
    report.rows.push_back(std::move(coef));
  }
  if (report.rows.empty())
    raise(errc::parse_failure, "no coefficient rows found" +
                                   (model_filter.empty() ? std::string()
                                                         : " for model " + model_filter));
  return report;
}

RegressionReport parse_report_csv_file(const std::string& path,
                                       const std::string& model_filter) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open '" + path + "'");
  return parse_report_csv(in, model_filter);
}

}  // namespace paneldyn
