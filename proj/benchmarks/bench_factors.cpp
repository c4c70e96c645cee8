#include <benchmark/benchmark.h>

#include "paneldyn/factors.hpp"
#include "paneldyn/panel.hpp"
#include "paneldyn/prep.hpp"
#include "paneldyn/synth.hpp"

namespace {

using namespace paneldyn;

void BM_ValuationWindowFit(benchmark::State& state) {
  const auto data = synth::generate_raw_panel({.n_firms = 1, .n_days = 600, .seed = 3});
  const RelativeChanges rc = compute_relative_changes(data);
  const FirmChangeSeries series{data.firm_series(rc.stock_return, 0),
                                data.firm_series(rc.eps_change, 0), rc.mkt_return,
                                rc.int_change, rc.gdp_change};
  const FactorConfig config;
  for (auto _ : state) {
    auto coeffs = fit_valuation_window(series, 0, 400, config);
    benchmark::DoNotOptimize(coeffs.alpha.data());
  }
}
BENCHMARK(BM_ValuationWindowFit);

void BM_BuildFeatures(benchmark::State& state) {
  const auto data = synth::generate_raw_panel(
      {.n_firms = static_cast<int>(state.range(0)), .n_days = 600, .seed = 5});
  for (auto _ : state) {
    const FeatureMatrix fm = build_features(data, {}, 1);
    benchmark::DoNotOptimize(fm.valuation.data());
  }
}
BENCHMARK(BM_BuildFeatures)->Arg(1)->Arg(10);

void BM_Winsorize(benchmark::State& state) {
  synth::CounterRng rng(9);
  std::vector<double> values(10000);
  for (size_t i = 0; i < values.size(); ++i) values[i] = rng.normal(0, i, 1);
  for (auto _ : state) {
    auto out = winsorize(values, 0.01, 0.99);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Winsorize);

void BM_GenerateRawPanel(benchmark::State& state) {
  for (auto _ : state) {
    const PanelDataset data =
        synth::generate_raw_panel({.n_firms = 10, .n_days = 600, .seed = 11});
    benchmark::DoNotOptimize(data.close.data());
  }
}
BENCHMARK(BM_GenerateRawPanel);

}  // namespace

BENCHMARK_MAIN();
