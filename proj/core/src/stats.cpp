#include "paneldyn/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "paneldyn/errors.hpp"

namespace paneldyn {

double mean(std::span<const double> values) {
  if (values.empty()) raise(errc::too_few_observations, "mean of empty range");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values, double precomputed_mean) {
  if (values.size() < 2)
    raise(errc::too_few_observations, "sample sd needs at least 2 values");
  double acc = 0.0;
  for (double v : values) {
    const double d = v - precomputed_mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double sample_sd(std::span<const double> values) {
  return sample_sd(values, mean(values));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) raise(errc::too_few_observations, "quantile of empty range");
  if (p < 0.0 || p > 1.0) raise(errc::invalid_config, "quantile level outside [0,1]");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> copy(values.begin(), values.end());
  std::sort(copy.begin(), copy.end());
  return quantile_sorted(copy, p);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(errc::mismatched_samples, "correlation inputs differ in length");
  if (x.size() < 2)
    raise(errc::too_few_observations, "correlation needs at least 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    raise(errc::zero_variance, "correlation with a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double normal_cdf(double z) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, z);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double student_t_two_sided_p(double t_abs, double dof) {
  const boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t_abs)));
}

double student_t_quantile(double p, double dof) {
  const boost::math::students_t_distribution<double> dist(dof);
  return boost::math::quantile(dist, p);
}

double f_upper_p(double f_stat, double dof1, double dof2) {
  if (f_stat <= 0.0) return 1.0;
  const boost::math::fisher_f_distribution<double> dist(dof1, dof2);
  return boost::math::cdf(boost::math::complement(dist, f_stat));
}

}  // namespace paneldyn
