#include "paneldyn/fe.hpp"

#include <cmath>
#include <string>

#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

void check_shape(size_t rows, PanelShape shape) {
  if (shape.n_firms < 1 || shape.n_days < 1 ||
      rows != static_cast<size_t>(shape.n()))
    raise(errc::unbalanced_panel,
          "column length " + std::to_string(rows) + " does not match a balanced " +
              std::to_string(shape.n_firms) + " x " + std::to_string(shape.n_days) +
              " panel");
}

}  // namespace

Eigen::VectorXd within_transform(const Eigen::VectorXd& column, PanelShape shape) {
  check_shape(column.size(), shape);
  const int nf = shape.n_firms, nd = shape.n_days;
  Eigen::VectorXd firm_mean = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd day_mean = Eigen::VectorXd::Zero(nd);
  for (int i = 0; i < nf; ++i) {
    for (int t = 0; t < nd; ++t) {
      const double v = column(i * nd + t);
      firm_mean(i) += v;
      day_mean(t) += v;
    }
  }
  firm_mean /= nd;
  day_mean /= nf;
  const double grand = firm_mean.mean();
  Eigen::VectorXd out(column.size());
  for (int i = 0; i < nf; ++i)
    for (int t = 0; t < nd; ++t)
      out(i * nd + t) = column(i * nd + t) - firm_mean(i) - day_mean(t) + grand;
  return out;
}

std::vector<double> within_transform(std::span<const double> column, PanelShape shape) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(column.data(), column.size());
  const Eigen::VectorXd w = within_transform(v, shape);
  return std::vector<double>(w.data(), w.data() + w.size());
}

Eigen::MatrixXd within_transform(const Eigen::MatrixXd& columns, PanelShape shape) {
  Eigen::MatrixXd out(columns.rows(), columns.cols());
  for (int j = 0; j < columns.cols(); ++j)
    out.col(j) = within_transform(Eigen::VectorXd(columns.col(j)), shape);
  return out;
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size())
    raise(errc::mismatched_samples, "design matrix and target differ in length");
  if (x.rows() < x.cols())
    raise(errc::rank_deficient, "fewer rows than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    const auto perm = qr.colsPermutation().indices();
    int offender = perm(qr.rank());
    raise(errc::rank_deficient,
          "design matrix is rank deficient at column " + std::to_string(offender));
  }
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - x * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  return fit;
}

Eigen::MatrixXd robust_covariance_dm3(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& residuals,
                                      HcDivisor divisor) {
  if (x.rows() != residuals.size())
    raise(errc::mismatched_samples, "residual length does not match the design matrix");
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Eigen::RowVectorXd row = x.row(t);
    const double h = row * bread * row.transpose();
    const double denom = divisor == HcDivisor::paper_plus ? 1.0 + h : 1.0 - h;
    const double w = residuals(t) / denom;
    meat.noalias() += row.transpose() * row * (w * w);
  }
  Eigen::MatrixXd cov = bread * meat * bread;
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd cluster_covariance(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& residuals,
                                   std::span<const int> cluster, bool small_sample,
                                   int k_model) {
  if (x.rows() != residuals.size() ||
      cluster.size() != static_cast<size_t>(x.rows()))
    raise(errc::mismatched_samples, "cluster labels must cover every row");
  int g = 0;
  for (int c : cluster) g = std::max(g, c + 1);
  if (g < 2) raise(errc::single_cluster, "clustered covariance needs at least 2 clusters");

  const int k = static_cast<int>(x.cols());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, k);
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    scores.row(cluster[t]) += residuals(t) * x.row(t);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (int c = 0; c < g; ++c)
    meat.noalias() += scores.row(c).transpose() * scores.row(c);

  const Eigen::MatrixXd bread =
      (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd cov = bread * meat * bread;
  if (small_sample) {
    const double n = static_cast<double>(x.rows());
    if (n - k_model <= 0.0)
      raise(errc::invalid_config,
            "small-sample factor undefined: n <= model parameter count");
    cov *= (static_cast<double>(g) / (g - 1.0)) * ((n - 1.0) / (n - k_model));
  }
  return 0.5 * (cov + cov.transpose());
}

double theil_r2(double r2, int n, int k) {
  if (n <= k) raise(errc::invalid_config, "adjusted R^2 undefined for n <= k");
  return 1.0 - (1.0 - r2) * (n - 1.0) / (n - k);
}

FTestResult f_test_from_rss(double rss_restricted, double rss_unrestricted, int q,
                            int n, int k_unrestricted) {
  FTestResult out;
  out.df1 = q;
  out.df2 = n - k_unrestricted;
  if (out.df1 <= 0 || out.df2 <= 0)
    raise(errc::invalid_config, "F test with non-positive degrees of freedom");
  if (rss_unrestricted <= 0.0) {
    out.statistic = rss_restricted > rss_unrestricted
                        ? std::numeric_limits<double>::infinity()
                        : 0.0;
    out.p_value = out.statistic > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.statistic = ((rss_restricted - rss_unrestricted) / out.df1) /
                  (rss_unrestricted / out.df2);
  if (out.statistic < 0.0) out.statistic = 0.0;  // guards rounding on equal fits
  out.p_value = f_upper_p(out.statistic, out.df1, out.df2);
  return out;
}

FEFit fit_two_way_fe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     PanelShape shape, const FEOptions& options) {
  check_shape(y.size(), shape);
  if (x.rows() != y.size())
    raise(errc::mismatched_samples, "design matrix and target differ in length");
  const int nf = shape.n_firms, nd = shape.n_days;
  const int k = static_cast<int>(x.cols());

  FEFit fit;
  fit.n_obs = shape.n();
  fit.n_firms = nf;
  fit.n_days = nd;
  fit.k_slopes = k;
  fit.k_total = k + (nf - 1) + (nd - 1) + 1;

  const Eigen::MatrixXd xw = within_transform(x, shape);
  const Eigen::VectorXd yw = within_transform(y, shape);
  const OlsFit within = ols_fit(xw, yw);
  fit.beta = within.beta;
  fit.residuals = within.residuals;
  fit.rss_within = within.rss;

  // Effects recovered from the raw data given the slopes.
  Eigen::VectorXd firm_mean_y = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd day_mean_y = Eigen::VectorXd::Zero(nd);
  Eigen::MatrixXd firm_mean_x = Eigen::MatrixXd::Zero(nf, k);
  Eigen::MatrixXd day_mean_x = Eigen::MatrixXd::Zero(nd, k);
  for (int i = 0; i < nf; ++i) {
    for (int t = 0; t < nd; ++t) {
      const int r = i * nd + t;
      firm_mean_y(i) += y(r);
      day_mean_y(t) += y(r);
      firm_mean_x.row(i) += x.row(r);
      day_mean_x.row(t) += x.row(r);
    }
  }
  firm_mean_y /= nd;
  day_mean_y /= nf;
  firm_mean_x /= nd;
  day_mean_x /= nf;
  const double grand_y = firm_mean_y.mean();
  const Eigen::RowVectorXd grand_x = firm_mean_x.colwise().mean();
  fit.intercept = grand_y - grand_x * fit.beta;
  fit.firm_effects = firm_mean_y - firm_mean_x * fit.beta -
                     Eigen::VectorXd::Constant(nf, fit.intercept);
  fit.time_effects = day_mean_y - day_mean_x * fit.beta -
                     Eigen::VectorXd::Constant(nd, fit.intercept);

  // Covariance of the slopes.
  if (options.cov == CovEstimator::cluster) {
    std::vector<int> labels(fit.n_obs);
    for (int i = 0; i < nf; ++i)
      for (int t = 0; t < nd; ++t) labels[i * nd + t] = i;
    fit.cov = cluster_covariance(xw, fit.residuals, labels,
                                 options.cluster_small_sample, fit.k_total);
  } else {
    fit.cov = robust_covariance_dm3(xw, fit.residuals, options.hc_divisor);
  }
  fit.se.resize(k);
  fit.t_values.resize(k);
  for (int j = 0; j < k; ++j) {
    fit.se(j) = std::sqrt(std::max(0.0, fit.cov(j, j)));
    fit.t_values(j) = fit.se(j) > 0.0 ? fit.beta(j) / fit.se(j) : 0.0;
  }

  // Goodness of fit on the raw dependent variable.
  const double tss = (y.array() - grand_y).matrix().squaredNorm();
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss_within / tss : 1.0;
  fit.theil = theil_r2(fit.r2, fit.n_obs, fit.k_total);

  // Pooled restricted fit (intercept plus the same slopes).
  Eigen::MatrixXd xp(fit.n_obs, k + 1);
  xp.col(0).setOnes();
  xp.rightCols(k) = x;
  const OlsFit pooled = ols_fit(xp, y);
  fit.rss_pooled = pooled.rss;
  fit.f_no_fixed_effects = f_test_from_rss(fit.rss_pooled, fit.rss_within,
                                           (nf - 1) + (nd - 1), fit.n_obs, fit.k_total);
  return fit;
}

double report_intercept(const FEFit& fit) {
  double acc_firms = 0.0;
  for (int i = 0; i < fit.n_firms; ++i) {
    double acc_days = 0.0;
    for (int t = 0; t < fit.n_days; ++t)
      acc_days += fit.intercept + fit.firm_effects(i) + fit.time_effects(t);
    acc_firms += acc_days / fit.n_days;
  }
  return acc_firms / fit.n_firms;
}

FTestResult f_test_no_fixed_effects(const FEFit& unrestricted, const OlsFit& restricted_pooled,
                                    int n, int k_slopes) {
  if (n != unrestricted.n_obs || k_slopes != unrestricted.k_slopes)
    raise(errc::mismatched_samples,
          "restricted and unrestricted fits must share rows and slope regressors");
  return f_test_from_rss(restricted_pooled.rss, unrestricted.rss_within,
                         (unrestricted.n_firms - 1) + (unrestricted.n_days - 1), n,
                         unrestricted.k_total);
}

}  // namespace paneldyn
