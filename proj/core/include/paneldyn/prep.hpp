#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paneldyn/factors.hpp"

namespace paneldyn {

struct PrepConfig {
  bool winsorize_enabled = true;
  double lower_pct = 0.01;
  double upper_pct = 0.99;
  bool per_firm_quantiles = true;  // false: pooled quantiles across firms
  bool standardize_enabled = true;
  bool resistance_exempt = true;
};

/// Clip below/above the lower/upper percentile. The cut points are the
/// interpolated quantiles snapped outward to the nearest observation inside
/// the interval, which makes the operation exactly idempotent (matching the
/// convention of replacing outliers with the last data point inside the
/// band). Order-preserving; the target column is never winsorized.
std::vector<double> winsorize(std::span<const double> values, double lower_pct,
                              double upper_pct);
void winsorize_in_place(std::span<double> values, double lower_pct, double upper_pct);

/// Per firm, per feature: subtract the firm mean and divide by the firm's
/// sample standard deviation. Resistance and the target stay untouched.
/// ZeroVariance names the offending firm and feature.
FeatureMatrix standardize_by_firm(const FeatureMatrix& features,
                                  bool resistance_exempt = true);

/// Full preparation pass: winsorize then standardize, both per config.
FeatureMatrix prepare(const FeatureMatrix& features, const PrepConfig& config = {});

enum class ModelId { m1v, m1t, m2, m2x, m3, m4 };

ModelId parse_model_id(const std::string& text);  // UnknownModel
const char* model_name(ModelId id);

/// Regressor identifiers for a model, in report order.
const std::vector<std::string>& model_terms(ModelId id);

/// Human-facing name for a regressor identifier.
std::string term_display_name(const std::string& term);

/// Monomial value of `term` given the base factor values of one row.
double expand_term(const std::string& term, double valuation, double trend,
                   double short_vol, double long_vol, double ltt, double volume,
                   double resistance);

/// Design matrix for the model: one column per term in model_terms order.
/// Powers and cross terms are computed from the (standardized) base columns
/// and are not re-standardized.
Eigen::MatrixXd polynomial_expand(const FeatureMatrix& features, ModelId id);

}  // namespace paneldyn
