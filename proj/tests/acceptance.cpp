// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run directly or through ctest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paneldyn/csv.hpp"
#include "paneldyn/diagnostics.hpp"
#include "paneldyn/factors.hpp"
#include "paneldyn/fe.hpp"
#include "paneldyn/models.hpp"
#include "paneldyn/panel.hpp"
#include "paneldyn/pipeline.hpp"
#include "paneldyn/prep.hpp"
#include "paneldyn/stats.hpp"
#include "paneldyn/surface.hpp"
#include "paneldyn/synth.hpp"

using namespace paneldyn;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int number, const std::string& what, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

void run(int number, const std::string& what, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(number, what, ok, detail);
}

RegressionReport published_model3() {
  struct Entry {
    const char* term;
    double coef_x1000;
    double t;
  };
  const Entry entries[9] = {
      {"valuation", 0.615, 3.7},      {"valuation_sq", 0.112, 1.72},
      {"valuation_cu", -0.01, -0.36}, {"trend", 0.721, 4.94},
      {"trend_sq", 0.108, 1.08},      {"trend_cu", -0.090, -2.57},
      {"trend_x_valuation", 0.103, 0.65}, {"trend_sq_x_valuation", 0.043, 0.7},
      {"trend_x_valuation_sq", 0.151, 4.58},
  };
  RegressionReport report;
  report.model = ModelId::m3;
  report.n_firms = 85;
  for (const auto& e : entries) {
    CoefficientRow row;
    row.term = e.term;
    row.coefficient = e.coef_x1000 * 1e-3;
    row.t_value = e.t;
    row.p_value = robust_p_value(std::fabs(e.t), report.n_firms);
    row.stars = stars_for_p(row.p_value);
    report.rows.push_back(row);
  }
  return report;
}

PanelDataset single_firm(const PanelDataset& data, int firm, int keep_days) {
  PanelDataset out;
  out.firms = {data.firms[firm]};
  out.dates.assign(data.dates.begin(), data.dates.begin() + keep_days);
  auto cut = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    const size_t base = data.idx(firm, 0);
    dst.assign(src.begin() + base, src.begin() + base + keep_days);
  };
  cut(data.close, out.close);
  cut(data.turnover, out.turnover);
  cut(data.eps_fy1, out.eps_fy1);
  cut(data.eps_fy2, out.eps_fy2);
  cut(data.mktcap, out.mktcap);
  out.spx.assign(data.spx.begin(), data.spx.begin() + keep_days);
  out.ust10y.assign(data.ust10y.begin(), data.ust10y.begin() + keep_days);
  out.gdp_fy1.assign(data.gdp_fy1.begin(), data.gdp_fy1.begin() + keep_days);
  if (!data.gdp_fy2.empty())
    out.gdp_fy2.assign(data.gdp_fy2.begin(), data.gdp_fy2.begin() + keep_days);
  return out;
}

}  // namespace

int main() {
  // 1. Exponential-weight normalization constant.
  run(1, "normalization constant sum(e^-k, k=1..10) = 0.58195 within 1e-5",
      [](std::string& detail) {
        const double sum = ewma_weight_sum(10);
        detail = "computed " + format_double(sum);
        return std::fabs(sum - 0.58195) < 1e-5;
      });

  // 2. Surface geometry from the published coefficients.
  run(2, "published-surface extrema at +-1.634 with values -+/-0.785e-3",
      [](std::string& detail) {
        const CubicSurface s = reduce_surface(published_model3(), 0.10);
        const TrendGeometry g = trend_geometry(s, 0.0);
        detail = "max_t=" + format_double(g.local_max_t) +
                 " max_r(x1000)=" + format_double(g.local_max_r * 1000.0);
        return std::fabs(g.local_max_t - 1.634) < 1e-3 &&
               std::fabs(g.local_min_t + 1.634) < 1e-3 &&
               std::fabs(g.local_max_r * 1000.0 - 0.785) < 1e-3 &&
               std::fabs(g.local_min_r * 1000.0 + 0.785) < 1e-3;
      });

  // 3. Level-set roots for a 0.25e-3 return.
  run(3, "level-set roots {-2.99, 0.352, 2.64} within 0.01",
      [](std::string& detail) {
        const CubicSurface s = reduce_surface(published_model3(), 0.10);
        const auto roots = level_set_roots(s, 0.0, 0.25e-3);
        if (roots.size() != 3) {
          detail = "got " + std::to_string(roots.size()) + " roots";
          return false;
        }
        detail = format_double(roots[0]) + ", " + format_double(roots[1]) + ", " +
                 format_double(roots[2]);
        return std::fabs(roots[0] + 2.99) < 0.01 && std::fabs(roots[1] - 0.352) < 0.01 &&
               std::fabs(roots[2] - 2.64) < 0.01;
      });

  // 4. Gaussian reference quantiles for N(0, 0.01492).
  run(4, "N(0, 0.01492) quantiles at the tabulated probes within 5e-4",
      [](std::string& detail) {
        std::vector<double> sample(100000);
        for (size_t i = 0; i < sample.size(); ++i)
          sample[i] = 0.01492 * normal_quantile((i + 0.5) / sample.size());
        const QuantileComparison cmp = quantile_compare(sample, 0.01492);
        struct Probe {
          double level, expected;
        };
        const Probe probes[] = {{0.01, -0.0347},  {0.99, 0.0347},  {0.10, -0.0191},
                                {0.90, 0.0191},   {0.001, -0.0461}, {0.999, 0.0461},
                                {0.0001, -0.0555}, {0.9999, 0.0555}};
        for (const auto& p : probes) {
          const auto& probe = cmp.at_level(p.level);
          if (std::fabs(probe.gaussian - p.expected) >= 5e-4) {
            detail = "level " + format_double(p.level) + " gaussian " +
                     format_double(probe.gaussian);
            return false;
          }
          if (std::fabs(probe.empirical - p.expected) >= 5e-4) {
            detail = "level " + format_double(p.level) + " empirical " +
                     format_double(probe.empirical);
            return false;
          }
        }
        return true;
      });

  // 5. Within estimator equals the LSDV oracle.
  run(5, "within slopes equal LSDV slopes on 100 random panels (1e-8 relative)",
      [](std::string& detail) {
        double worst = 0.0;
        for (uint64_t seed = 1; seed <= 100; ++seed) {
          synth::CounterRng rng(seed);
          const int nf = 3 + static_cast<int>(seed % 4);      // up to 6 firms
          const int nd = 5 + static_cast<int>(seed % 4);      // up to 8 days
          const int k = 1 + static_cast<int>(seed % 3);       // up to 3 regressors
          Eigen::MatrixXd x(nf * nd, k);
          Eigen::VectorXd y(nf * nd);
          for (int i = 0; i < nf; ++i)
            for (int t = 0; t < nd; ++t) {
              const int r = i * nd + t;
              double signal = 0.0;
              for (int j = 0; j < k; ++j) {
                x(r, j) = rng.normal(i, t, 10 + j);
                signal += 0.4 * (j + 1) * x(r, j);
              }
              y(r) = signal + rng.normal(i, 0, 20) + rng.normal(0, t, 21) +
                     0.5 * rng.normal(i, t, 22);
            }
          const PanelShape shape{nf, nd};
          const FEFit fit = fit_two_way_fe(x, y, shape);
          const Eigen::VectorXd lsdv = synth::oracle_lsdv(x, y, shape);
          const double rel = (fit.beta - lsdv).norm() / std::max(1e-30, lsdv.norm());
          worst = std::max(worst, rel);
        }
        detail = "worst relative gap " + format_double(worst);
        return worst < 1e-8;
      });

  // 6. Hand-computed DM3 covariance.
  run(6, "DM3 variance on x=(1,1), y=(1,3) equals 2/9 within 1e-10",
      [](std::string& detail) {
        Eigen::MatrixXd x(2, 1);
        x << 1, 1;
        Eigen::VectorXd y(2);
        y << 1, 3;
        const OlsFit fit = ols_fit(x, y);
        const Eigen::MatrixXd cov = robust_covariance_dm3(x, fit.residuals);
        detail = "variance " + format_double(cov(0, 0));
        return std::fabs(cov(0, 0) - 2.0 / 9.0) < 1e-10;
      });

  // 7. Implanted-truth recovery with clustered confidence intervals.
  run(7, "implanted Model-3 truth: 95% CI coverage >= 90/100 and mean extrema within 0.25",
      [](std::string& detail) {
        const std::map<std::string, double> truth = {
            {"valuation", 0.615e-3},
            {"valuation_sq", 0.112e-3},
            {"trend", 0.721e-3},
            {"trend_cu", -0.090e-3},
            {"trend_x_valuation_sq", 0.151e-3}};
        const auto& terms = model_terms(ModelId::m3);
        std::vector<int> covered(terms.size(), 0);
        double max_acc = 0.0, min_acc = 0.0;
        int geo_count = 0;
        const int trials = 100;
        FitOptions options;
        options.prep.winsorize_enabled = false;
        options.prep.standardize_enabled = false;
        for (int trial = 0; trial < trials; ++trial) {
          synth::SynthConfig cfg;
          cfg.n_firms = 20;
          cfg.n_days = 500;
          cfg.seed = 4000 + trial;
          cfg.beta = truth;
          cfg.idio_sd = 0.003;
          cfg.firm_effect_sd = 0.001;
          cfg.time_effect_sd = 0.001;
          const auto panel = synth::generate_feature_panel(cfg);
          const ModelFit fit = fit_model(ModelId::m3, panel.features, options);
          const double crit = student_t_quantile(0.975, cfg.n_firms - 1);
          for (size_t j = 0; j < terms.size(); ++j) {
            const auto it = truth.find(terms[j]);
            const double expected = it == truth.end() ? 0.0 : it->second;
            const auto& row = fit.report.rows[j];
            if (std::fabs(row.coefficient - expected) <= crit * row.se) ++covered[j];
          }
          const CubicSurface s = reduce_surface(fit.report, 0.10);
          const TrendGeometry g = trend_geometry(s, 0.0);
          max_acc += g.local_max_t;
          min_acc += g.local_min_t;
          ++geo_count;
        }
        const int worst = *std::min_element(covered.begin(), covered.end());
        const double mean_max = max_acc / geo_count;
        const double mean_min = min_acc / geo_count;
        detail = "worst coverage " + std::to_string(worst) + "/100, mean extrema (" +
                 format_double(mean_min) + ", " + format_double(mean_max) + ")";
        return worst >= 90 && std::fabs(mean_max - 1.634) < 0.25 &&
               std::fabs(mean_min + 1.634) < 0.25;
      });

  // 8. Paper-scale pipeline shape and look-ahead invariance.
  run(8, "85 x 3289 simulated panel gives 3031 rows per firm; truncation probes match",
      [](std::string& detail) {
        const synth::RawSynthConfig cfg{.n_firms = 85, .n_days = 3289, .seed = 2024};
        const PanelDataset data = synth::generate_raw_panel(cfg);
        if (data.size() != 279565u) {
          detail = "record count " + std::to_string(data.size());
          return false;
        }
        const FactorConfig factors;
        const FeatureMatrix fm = build_features(data, factors, 2);
        if (fm.days_per_firm != 3031) {
          detail = "rows per firm " + std::to_string(fm.days_per_firm);
          return false;
        }
        // 20 deterministic (firm, day) probes: rebuild on the truncated
        // single-firm panel and require bit-identical features.
        synth::CounterRng rng(99);
        for (int probe = 0; probe < 20; ++probe) {
          const int firm = static_cast<int>(rng.word(probe, 0, 1) % 85);
          const int day =
              fm.first_day + static_cast<int>(rng.word(probe, 1, 2) %
                                              static_cast<uint64_t>(fm.days_per_firm));
          const PanelDataset cut = single_firm(data, firm, day + 2);
          const FeatureMatrix probe_fm = build_features(cut, factors, 1);
          const size_t a = fm.idx(firm, day - fm.first_day);
          const size_t b = probe_fm.idx(0, day - probe_fm.first_day);
          const bool same = fm.valuation[a] == probe_fm.valuation[b] &&
                            fm.trend[a] == probe_fm.trend[b] &&
                            fm.short_volatility[a] == probe_fm.short_volatility[b] &&
                            fm.long_volatility[a] == probe_fm.long_volatility[b] &&
                            fm.long_term_trend[a] == probe_fm.long_term_trend[b] &&
                            fm.volume[a] == probe_fm.volume[b] &&
                            fm.resistance[a] == probe_fm.resistance[b] &&
                            fm.target[a] == probe_fm.target[b];
          if (!same) {
            detail = "probe firm " + std::to_string(firm) + " day " + std::to_string(day);
            return false;
          }
        }
        detail = "3031 rows per firm, 20/20 probes bit-identical";
        return true;
      });

  // 9. Preprocessing properties.
  run(9, "winsorize idempotent+monotone on 1000 vectors; per-firm standardization exact",
      [](std::string& detail) {
        synth::CounterRng rng(55);
        for (int v = 0; v < 1000; ++v) {
          const size_t n = 20 + rng.word(v, 0, 1) % 280;
          std::vector<double> values(n);
          for (size_t i = 0; i < n; ++i) values[i] = rng.normal(v, i, 2);
          const auto once = winsorize(values, 0.01, 0.99);
          const auto twice = winsorize(once, 0.01, 0.99);
          if (once != twice) {
            detail = "idempotence failed on vector " + std::to_string(v);
            return false;
          }
          std::vector<size_t> order(n);
          std::iota(order.begin(), order.end(), size_t{0});
          std::sort(order.begin(), order.end(),
                    [&](size_t a, size_t b) { return values[a] < values[b]; });
          for (size_t i = 1; i < n; ++i)
            if (once[order[i - 1]] > once[order[i]]) {
              detail = "monotonicity failed on vector " + std::to_string(v);
              return false;
            }
        }
        synth::SynthConfig cfg;
        cfg.n_firms = 10;
        cfg.n_days = 120;
        cfg.seed = 777;
        const auto panel = synth::generate_feature_panel(cfg);
        const FeatureMatrix prepared = prepare(panel.features, {});
        for (const auto& name : FeatureMatrix::base_columns()) {
          if (name == "resistance") continue;
          const auto col = prepared.column(name);
          for (int i = 0; i < prepared.n_firms(); ++i) {
            const auto firm_col = col.subspan(prepared.idx(i, 0), prepared.days_per_firm);
            if (std::fabs(mean(firm_col)) >= 1e-10 ||
                std::fabs(sample_sd(firm_col) - 1.0) >= 1e-10) {
              detail = "firm " + std::to_string(i) + " feature " + name;
              return false;
            }
          }
        }
        return true;
      });

  // 10. Byte-identical report outputs across thread counts.
  run(10, "report is byte-identical for --threads 1 and 8",
      [](std::string& detail) {
        const fs::path tmp =
            fs::temp_directory_path() / ("paneldyn_acc_" + std::to_string(::getpid()));
        fs::create_directories(tmp);
        RunConfig sim;
        sim.out_dir = (tmp / "sim").string();
        sim.sim.n_firms = 6;
        sim.sim.n_days = 400;
        sim.sim.seed = 31;
        cmd_simulate(sim);

        RunConfig rep;
        rep.panel_path = (tmp / "sim" / "panel.csv").string();
        rep.macro_path = (tmp / "sim" / "macro.csv").string();
        rep.out_dir = (tmp / "rep1").string();
        rep.threads = 1;
        cmd_report(rep);
        rep.out_dir = (tmp / "rep8").string();
        rep.threads = 8;
        cmd_report(rep);

        bool ok = true;
        for (const auto& entry : fs::directory_iterator(tmp / "rep1")) {
          const std::string name = entry.path().filename().string();
          const std::string a = read_text_file(((tmp / "rep1") / name).string());
          const std::string b = read_text_file(((tmp / "rep8") / name).string());
          if (a != b) {
            detail = "file differs: " + name;
            ok = false;
            break;
          }
        }
        std::error_code ec;
        fs::remove_all(tmp, ec);
        return ok;
      });

  if (failures == 0) std::printf("acceptance: all criteria passed\n");
  else std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
