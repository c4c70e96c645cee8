#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "paneldyn/diagnostics.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"
#include "paneldyn/synth.hpp"

using namespace paneldyn;

namespace {

/// Exact Gaussian sample: quantiles at mid-point plotting positions.
std::vector<double> exact_gaussian(size_t n, double sd) {
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = sd * normal_quantile((i + 0.5) / static_cast<double>(n));
  return out;
}

std::vector<double> random_normals(uint64_t seed, size_t n) {
  synth::CounterRng rng(seed);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = rng.normal(0, i, 3);
  return out;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("gaussian reference quantiles at the tabulated levels") {
  const auto sample = exact_gaussian(200000, 0.01492);
  const QuantileComparison cmp = quantile_compare(sample, 0.01492);
  CHECK(std::fabs(cmp.at_level(0.01).gaussian - (-0.0347)) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.99).gaussian - 0.0347) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.10).gaussian - (-0.0191)) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.90).gaussian - 0.0191) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.001).gaussian - (-0.0461)) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.999).gaussian - 0.0461) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.0001).gaussian - (-0.0555)) < 5e-4);
  CHECK(std::fabs(cmp.at_level(0.9999).gaussian - 0.0555) < 5e-4);
  // The sample is exact, so empirical quantiles sit on the reference.
  CHECK(std::fabs(cmp.at_level(0.01).empirical - cmp.at_level(0.01).gaussian) < 2e-4);
  CHECK(std::fabs(cmp.at_level(0.10).tail_ratio - 1.0) < 1e-2);
}

TEST_CASE("tail ratio reproduces the percentile-ratio arithmetic") {
  // Observed 10% quantile of -0.019 under N(0, 0.01492): mass 0.10143,
  // ratio 1.0143. Observed 0.01% value of -0.055: ratio 1.1376.
  CHECK(normal_cdf(-0.019 / 0.01492) / 0.10 == doctest::Approx(1.0143).epsilon(1e-3));
  CHECK(normal_cdf(-0.055 / 0.01492) / 0.0001 == doctest::Approx(1.1376).epsilon(2e-3));

  // Engineer a sample whose 10% quantile is exactly -0.019 (h = 0.1*10 = 1,
  // the second order statistic) and confirm the reported ratio.
  std::vector<double> sample = {-0.03, -0.019, -0.01, -0.005, -0.001, 0.0,
                                0.001, 0.005,  0.01,  0.02,   0.03};
  QuantileComparison cmp = quantile_compare(sample, 0.01492);
  // Force the centered convention used by the appendix arithmetic.
  const double z = (-0.019 - cmp.mean) / 0.01492;
  CHECK(cmp.at_level(0.10).empirical == doctest::Approx(-0.019));
  CHECK(cmp.at_level(0.10).tail_ratio == doctest::Approx(normal_cdf(z) / 0.10));
}

TEST_CASE("symmetric input has a zero median probe") {
  std::vector<double> sample;
  for (int i = 1; i <= 500; ++i) {
    sample.push_back(i * 1e-4);
    sample.push_back(-i * 1e-4);
  }
  const QuantileComparison cmp = quantile_compare(sample);
  CHECK(cmp.at_level(0.50).empirical == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("extreme probes are dropped on small samples") {
  const auto sample = random_normals(4, 500);
  const QuantileComparison cmp = quantile_compare(sample);
  CHECK_THROWS_AS(cmp.at_level(0.0001), Error);
  bool found_unresolved = false;
  for (const auto& probe : cmp.probes)
    if (!probe.resolved) found_unresolved = true;
  CHECK(found_unresolved);
  CHECK_NOTHROW(cmp.at_level(0.01));  // 500 * 0.01 = 5 observations in the tail
}

TEST_CASE("property: diagnostics are permutation invariant") {
  auto sample = random_normals(9, 2000);
  auto shuffled = sample;
  std::mt19937 rng(17);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const QuantileComparison a = quantile_compare(sample);
  const QuantileComparison b = quantile_compare(shuffled);
  for (size_t j = 0; j < a.probes.size(); ++j) {
    CHECK(a.probes[j].empirical == b.probes[j].empirical);
    CHECK(a.probes[j].gaussian == b.probes[j].gaussian);
  }
  CHECK(normality_correlation(sample) == normality_correlation(shuffled));
}

TEST_CASE("property: location-scale transforms shift the empirical quantiles exactly") {
  const auto sample = random_normals(11, 3000);
  std::vector<double> moved(sample.size());
  for (size_t i = 0; i < sample.size(); ++i) moved[i] = 3.0 * sample[i] + 1.0;
  const QuantileComparison a = quantile_compare(sample);
  const QuantileComparison b = quantile_compare(moved);
  for (size_t j = 0; j < a.probes.size(); ++j) {
    if (!a.probes[j].resolved) continue;
    CHECK(b.probes[j].empirical ==
          doctest::Approx(3.0 * a.probes[j].empirical + 1.0).epsilon(1e-12));
  }
}

TEST_CASE("normality correlation: exact gaussian scores are nearly 1") {
  const auto sample = exact_gaussian(5000, 1.0);
  CHECK(normality_correlation(sample) > 0.9999);
}

TEST_CASE("normality correlation: heavy tails score below gaussian, 100 seeded trials") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto gauss = random_normals(1000 + seed, 500);
    std::vector<double> heavy(gauss.size());
    for (size_t i = 0; i < gauss.size(); ++i) heavy[i] = gauss[i] * gauss[i] * gauss[i];
    CHECK(normality_correlation(heavy) < normality_correlation(gauss));
  }
}

TEST_CASE("normality correlation: uniform sample matches a direct-formula oracle") {
  std::vector<double> sample(10000);
  synth::CounterRng rng(77);
  for (size_t i = 0; i < sample.size(); ++i) sample[i] = rng.uniform(0, i, 5);
  const double got = normality_correlation(sample);

  // Independent route: population moments of sorted values vs normal scores.
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> scores(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i)
    scores[i] = normal_quantile((i + 1.0 - 0.375) / (n + 0.25));
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    sx += sorted[i];
    sy += scores[i];
    sxy += sorted[i] * scores[i];
    sxx += sorted[i] * sorted[i];
    syy += scores[i] * scores[i];
  }
  const double oracle = (sxy / n - sx / n * sy / n) /
                        (std::sqrt(sxx / n - sx / n * sx / n) *
                         std::sqrt(syy / n - sy / n * sy / n));
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("normality correlation needs ten observations") {
  std::vector<double> tiny = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(normality_correlation(tiny), Error);
}

TEST_CASE("quantile CSV rendering marks unresolved probes") {
  const auto sample = random_normals(5, 200);
  const std::string csv = render_quantile_csv(quantile_compare(sample));
  CHECK(csv.find("level,empirical,gaussian,tail_ratio,resolved") == 0);
  CHECK(csv.find(",0\n") != std::string::npos);  // at least one unresolved probe
}

}  // TEST_SUITE
