#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paneldyn {

struct QuantileProbe {
  double level = 0.0;
  double empirical = 0.0;
  double gaussian = 0.0;
  /// Gaussian tail mass at the observed quantile divided by the nominal tail
  /// mass; 1 when the residuals match the reference exactly.
  double tail_ratio = 0.0;
  bool resolved = true;  // false when the sample is too small for the level
};

struct QuantileComparison {
  double mean = 0.0;
  double sd = 0.0;  // reference SD (sample SD unless overridden)
  size_t n = 0;
  std::vector<QuantileProbe> probes;

  const QuantileProbe& at_level(double level) const;  // TooFewObservations
};

/// Default probe levels from the extreme tails inward.
std::span<const double> default_probe_levels();

/// Empirical residual quantiles against a Gaussian with matching mean and
/// SD (the SD may be pinned), plus the tail-mass ratio diagnostic. Probes
/// finer than the sample can resolve are flagged unresolved.
QuantileComparison quantile_compare(std::span<const double> residuals,
                                    std::optional<double> fixed_sd = {},
                                    std::span<const double> levels = default_probe_levels());

/// Probability-plot correlation: Pearson correlation between the sorted
/// residuals and normal scores at plotting positions (i - 3/8) / (n + 1/4).
double normality_correlation(std::span<const double> residuals);

std::string render_quantile_csv(const QuantileComparison& comparison);

}  // namespace paneldyn
