#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "paneldyn/fe.hpp"
#include "paneldyn/synth.hpp"

namespace {

using namespace paneldyn;

struct FePanel {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  PanelShape shape;
};

FePanel make_panel(int nf, int nd, int k) {
  synth::CounterRng rng(7);
  FePanel panel{Eigen::MatrixXd(nf * nd, k), Eigen::VectorXd(nf * nd), {nf, nd}};
  for (int i = 0; i < nf; ++i)
    for (int t = 0; t < nd; ++t) {
      const int r = i * nd + t;
      double signal = 0.0;
      for (int j = 0; j < k; ++j) {
        panel.x(r, j) = rng.normal(i, t, j);
        signal += 1e-3 * panel.x(r, j);
      }
      panel.y(r) = signal + 0.01 * rng.normal(i, t, 99);
    }
  return panel;
}

void BM_WithinTransform(benchmark::State& state) {
  const auto panel = make_panel(85, 3031, 1);
  const std::vector<double> col(panel.y.data(), panel.y.data() + panel.y.size());
  for (auto _ : state) {
    auto out = within_transform(col, panel.shape);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_WithinTransform);

void BM_TwoWayFixedEffectsFit(benchmark::State& state) {
  const auto panel = make_panel(static_cast<int>(state.range(0)), 1000, 9);
  for (auto _ : state) {
    const FEFit fit = fit_two_way_fe(panel.x, panel.y, panel.shape);
    benchmark::DoNotOptimize(fit.beta.data());
  }
}
BENCHMARK(BM_TwoWayFixedEffectsFit)->Arg(20)->Arg(85);

void BM_ClusterCovariance(benchmark::State& state) {
  const auto panel = make_panel(20, 1000, 9);
  const OlsFit fit = ols_fit(panel.x, panel.y);
  std::vector<int> labels(panel.shape.n());
  for (int i = 0; i < panel.shape.n_firms; ++i)
    for (int t = 0; t < panel.shape.n_days; ++t) labels[i * panel.shape.n_days + t] = i;
  const int k_model = 9 + 19 + 999 + 1;
  for (auto _ : state) {
    auto cov = cluster_covariance(panel.x, fit.residuals, labels, true, k_model);
    benchmark::DoNotOptimize(cov.data());
  }
}
BENCHMARK(BM_ClusterCovariance);

}  // namespace
