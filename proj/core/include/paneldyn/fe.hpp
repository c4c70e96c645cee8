#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace paneldyn {

/// Balanced panel layout: row = firm * n_days + day.
struct PanelShape {
  int n_firms = 0;
  int n_days = 0;
  int n() const { return n_firms * n_days; }
};

/// x_it - mean_i - mean_t + grand mean. Firm and day sums of the output
/// vanish on a balanced panel.
std::vector<double> within_transform(std::span<const double> column, PanelShape shape);
Eigen::VectorXd within_transform(const Eigen::VectorXd& column, PanelShape shape);
Eigen::MatrixXd within_transform(const Eigen::MatrixXd& columns, PanelShape shape);

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double rss = 0.0;
};

/// Least squares via column-pivoted Householder QR. RankDeficient reports the
/// first redundant column index.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

enum class HcDivisor {
  paper_plus,  // squared residuals divided by (1 + h_t)^2
  hc3_minus,   // the textbook (1 - h_t)^2
};

/// Heteroscedasticity-robust sandwich with Omega_tt = e_t^2 / (1 +- h_t)^2.
Eigen::MatrixXd robust_covariance_dm3(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& residuals,
                                      HcDivisor divisor = HcDivisor::paper_plus);

/// Cluster-robust sandwich: meat sums score outer products per cluster.
/// With small_sample, scales by G/(G-1) * (N-1)/(N-k_model).
Eigen::MatrixXd cluster_covariance(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& residuals,
                                   std::span<const int> cluster, bool small_sample,
                                   int k_model);

/// Degrees-of-freedom adjusted R^2: 1 - (1 - r2) (n - 1) / (n - k).
double theil_r2(double r2, int n, int k);

struct FTestResult {
  double statistic = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
};

FTestResult f_test_from_rss(double rss_restricted, double rss_unrestricted, int q,
                            int n, int k_unrestricted);

enum class CovEstimator { cluster, dm3 };

struct FEOptions {
  CovEstimator cov = CovEstimator::cluster;
  HcDivisor hc_divisor = HcDivisor::paper_plus;
  bool cluster_small_sample = true;
};

/// Two-way fixed-effects fit: slopes from the within regression, robust
/// covariance per options, recovered zero-sum effects, Theil R^2 and the
/// no-fixed-effects F test against the pooled OLS fit.
struct FEFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd t_values;
  Eigen::MatrixXd cov;
  Eigen::VectorXd residuals;     // within residuals, row-aligned
  Eigen::VectorXd firm_effects;  // zero-sum
  Eigen::VectorXd time_effects;  // zero-sum
  double intercept = 0.0;
  double r2 = 0.0;        // unadjusted, on the raw dependent variable
  double theil = 0.0;     // degrees-of-freedom adjusted
  FTestResult f_no_fixed_effects;
  double rss_within = 0.0;
  double rss_pooled = 0.0;
  int n_obs = 0;
  int n_firms = 0;
  int n_days = 0;
  int k_slopes = 0;
  int k_total = 0;  // slopes + absorbed effects + grand intercept
};

FEFit fit_two_way_fe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     PanelShape shape, const FEOptions& options = {});

/// Grand mean over firms of the daily mean of intercept + firm effect +
/// time effect. Equals the grand intercept under the zero-sum normalization.
double report_intercept(const FEFit& fit);

FTestResult f_test_no_fixed_effects(const FEFit& unrestricted, const OlsFit& restricted_pooled,
                                    int n, int k_slopes);

}  // namespace paneldyn
