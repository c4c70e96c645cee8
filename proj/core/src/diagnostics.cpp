#include "paneldyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

constexpr double kLevels[] = {0.0001, 0.001, 0.01, 0.10, 0.50,
                              0.90,   0.99,  0.999, 0.9999};

}  // namespace

std::span<const double> default_probe_levels() { return kLevels; }

const QuantileProbe& QuantileComparison::at_level(double level) const {
  for (const auto& probe : probes)
    if (probe.level == level && probe.resolved) return probe;
  raise(errc::too_few_observations,
        "probe level " + format_double(level) + " not resolved");
}

QuantileComparison quantile_compare(std::span<const double> residuals,
                                    std::optional<double> fixed_sd,
                                    std::span<const double> levels) {
  if (residuals.size() < 2)
    raise(errc::too_few_observations, "quantile comparison needs at least 2 residuals");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());

  QuantileComparison out;
  out.n = sorted.size();
  out.mean = mean(sorted);
  out.sd = fixed_sd.value_or(sample_sd(sorted, out.mean));
  if (!(out.sd > 0.0)) raise(errc::zero_variance, "residuals have zero variance");

  const double n = static_cast<double>(sorted.size());
  for (double level : levels) {
    QuantileProbe probe;
    probe.level = level;
    // A tail level needs enough mass to be estimable at all: the extreme
    // probes require on the order of 1/level observations.
    const double tail = std::min(level, 1.0 - level);
    probe.resolved = level == 0.5 || tail * n >= 1.0;
    probe.gaussian = out.mean + out.sd * normal_quantile(level);
    if (probe.resolved) {
      probe.empirical = quantile_sorted(sorted, level);
      const double z = (probe.empirical - out.mean) / out.sd;
      if (level <= 0.5)
        probe.tail_ratio = normal_cdf(z) / level;
      else
        probe.tail_ratio = (1.0 - normal_cdf(z)) / (1.0 - level);
    }
    out.probes.push_back(probe);
  }
  return out;
}

double normality_correlation(std::span<const double> residuals) {
  if (residuals.size() < 10)
    raise(errc::too_few_observations,
          "normality correlation needs at least 10 residuals");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> scores(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i)
    scores[i] = normal_quantile((static_cast<double>(i) + 1.0 - 0.375) / (n + 0.25));
  return pearson_correlation(sorted, scores);
}

std::string render_quantile_csv(const QuantileComparison& comparison) {
  std::string out = "level,empirical,gaussian,tail_ratio,resolved\n";
  for (const auto& probe : comparison.probes) {
    out += format_double(probe.level);
    out += ',';
    out += probe.resolved ? format_double(probe.empirical) : "";
    out += ',';
    out += format_double(probe.gaussian);
    out += ',';
    out += probe.resolved ? format_double(probe.tail_ratio) : "";
    out += ',';
    out += probe.resolved ? "1" : "0";
    out += '\n';
  }
  return out;
}

}  // namespace paneldyn
