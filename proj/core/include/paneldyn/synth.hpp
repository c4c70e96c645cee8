#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paneldyn/factors.hpp"
#include "paneldyn/fe.hpp"
#include "paneldyn/panel.hpp"

namespace paneldyn {
namespace synth {

/// Counter-based generator: every draw is a pure hash of
/// (seed, firm, day, stream, counter), so parallel per-firm generation is
/// order-independent and bit-reproducible.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  uint64_t word(uint64_t firm, uint64_t day, uint64_t stream, uint64_t counter = 0) const;
  /// Uniform draw in the open interval (0, 1).
  double uniform(uint64_t firm, uint64_t day, uint64_t stream, uint64_t counter = 0) const;
  /// Standard normal via the inverse CDF of the uniform draw.
  double normal(uint64_t firm, uint64_t day, uint64_t stream, uint64_t counter = 0) const;

 private:
  uint64_t seed_;
};

/// Configuration for direct feature-panel generation with implanted truth.
struct SynthConfig {
  int n_firms = 20;
  int n_days = 500;
  uint64_t seed = 1;
  /// True slope per regressor identifier (any Model-4 subset); omitted
  /// terms have true coefficient zero.
  std::map<std::string, double> beta;
  double firm_effect_sd = 0.001;
  double time_effect_sd = 0.001;
  double idio_sd = 0.003;
  double resistance_prob = 0.01;
};

struct SynthTruth {
  std::map<std::string, double> beta;
  std::vector<double> firm_effects;
  std::vector<double> time_effects;
};

struct SyntheticFeaturePanel {
  FeatureMatrix features;
  SynthTruth truth;
};

/// Base regressors drawn as standard normals per firm (resistance as a rare
/// 0/1 draw); target = sum of implanted terms + firm effect + time effect +
/// idiosyncratic noise.
SyntheticFeaturePanel generate_feature_panel(const SynthConfig& config);

/// Raw-panel generator: geometric random-walk prices, lognormal-walk
/// turnover, stepwise-revised EPS/GDP forecasts, macro series.
struct RawSynthConfig {
  int n_firms = 85;
  int n_days = 3289;
  uint64_t seed = 7;
  std::string start_date = "2004-12-28";

  double price_level = 60.0;
  double price_drift = 0.0002;
  double price_vol = 0.015;
  double turnover_level = 5.0e8;
  double turnover_vol = 0.08;
  double eps_level = 5.0;
  double eps_revision_prob = 0.27;
  double eps_revision_vol = 0.02;
  double gdp_level = 2.5;
  double gdp_revision_prob = 0.27;
  double gdp_revision_vol = 0.01;
  double spx_level = 1200.0;
  double spx_drift = 0.0002;
  double spx_vol = 0.011;
  double yield_level = 3.0;
  double yield_vol = 0.006;
  double market_beta = 0.8;  // loading of firm returns on the index return

  /// Strength of the cubic feedback of the lagged price trend on the next
  /// return (0 disables). The response follows the reduced trend cubic with
  /// the trend measured in units of `feedback_scale` standard deviations.
  double cubic_feedback = 0.0;
  double feedback_scale = 0.01;

  bool emit_eps_fy2 = false;
  bool emit_gdp_fy2 = false;
  bool emit_mktcap = true;
  double mktcap_level = 9.6e10;
};

PanelDataset generate_raw_panel(const RawSynthConfig& config);

/// Dummy-variable (LSDV) oracle: plain OLS on [X | firm dummies | day
/// dummies | intercept]; returns the slope block. Meant for small panels.
Eigen::VectorXd oracle_lsdv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            PanelShape shape);

}  // namespace synth
}  // namespace paneldyn
