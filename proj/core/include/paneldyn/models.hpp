#pragma once

#include <istream>
#include <string>
#include <vector>

#include "paneldyn/fe.hpp"
#include "paneldyn/prep.hpp"

namespace paneldyn {

struct CoefficientRow {
  std::string term;
  std::string display;
  double coefficient = 0.0;  // raw units
  double se = 0.0;           // robust, per the chosen estimator
  double t_value = 0.0;
  double p_value = 1.0;
  int stars = 0;  // 0..3 for 90/95/99%
};

struct RegressionReport {
  ModelId model = ModelId::m1v;
  std::vector<CoefficientRow> rows;
  double intercept = 0.0;  // grand mean convention, uncorrected
  double theil_r2 = 0.0;
  FTestResult f_no_fixed_effects;
  int f_stars = 0;
  int n_obs = 0;
  int n_firms = 0;
  int n_days = 0;

  const CoefficientRow* find(const std::string& term) const;
};

struct FitOptions {
  PrepConfig prep{};
  FEOptions fe{};
};

struct ModelFit {
  RegressionReport report;
  FEFit fe;
};

/// Two-sided p-value for a robust t statistic: normal reference for 30+
/// clusters, Student t with G-1 degrees of freedom below that.
double robust_p_value(double t_abs, int n_clusters);
int stars_for_p(double p);

/// Fit one model end to end: prepare features, expand regressors, run the
/// two-way fixed-effects estimator, assemble the report.
ModelFit fit_model(ModelId id, const FeatureMatrix& features, const FitOptions& options = {});

/// The five headline models (1V, 1T, 2, 3, 4) on a shared sample.
std::vector<RegressionReport> run_table2(const FeatureMatrix& features,
                                         const FitOptions& options = {});

/// Aligned text rendering; coefficients and standard errors scaled by 1,000.
std::string render_table_text(const std::vector<RegressionReport>& reports);

/// Machine rendering, raw units: model,term,coefficient,se,t,p,stars rows
/// plus summary lines.
std::string render_table_csv(const std::vector<RegressionReport>& reports);
std::string render_report_csv(const RegressionReport& report);

/// Parse a report back from render_report_csv / render_table_csv output
/// (used by surface analysis on a saved fit).
RegressionReport parse_report_csv(std::istream& in, const std::string& model_filter = "");
RegressionReport parse_report_csv_file(const std::string& path,
                                       const std::string& model_filter = "");

}  // namespace paneldyn
