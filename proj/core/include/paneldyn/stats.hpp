#pragma once

#include <span>
#include <vector>

namespace paneldyn {

double mean(std::span<const double> values);

/// Sample standard deviation (divisor n-1), two-pass.
double sample_sd(std::span<const double> values);
double sample_sd(std::span<const double> values, double precomputed_mean);

/// Quantile by linear interpolation between order statistics:
/// h = p*(n-1), q = x_(floor h) + frac(h) * (x_(floor h + 1) - x_(floor h)).
/// `quantile` sorts a copy; `quantile_sorted` expects ascending input.
double quantile(std::span<const double> values, double p);
double quantile_sorted(std::span<const double> sorted, double p);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

// Distribution helpers (Boost.Math behind the scenes).
double normal_cdf(double z);
double normal_quantile(double p);
double student_t_two_sided_p(double t_abs, double dof);
double student_t_quantile(double p, double dof);
double f_upper_p(double f_stat, double dof1, double dof2);

}  // namespace paneldyn
