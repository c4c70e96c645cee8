#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "paneldyn/panel.hpp"

namespace paneldyn {

/// Window lengths and thresholds for every factor. All windows are in
/// trading days.
struct FactorConfig {
  int val_window = 189;          // rolling valuation regression length
  bool window_includes_t = false;  // false: fit on [t-w, t-1]; true: on [t-w+1, t]
  double significance_alpha = 0.10;
  bool filter_intercept = true;  // intercept subject to the significance filter too

  int trend_lookback = 10;
  int vol_short = 10;
  int vol_long = 251;
  int ltt_window = 251;
  int volume_lookback = 10;

  double resistance_threshold = 0.85;
  int res_high_start = 63;  // high looked up over [t-63, t-16]
  int res_high_end = 16;
  int res_dip_start = 15;   // dip condition checked over [t-15, t-10]
  int res_dip_end = 10;

  bool blend_forecasts = false;  // day-weighted blend of FY1/FY2 EPS and GDP

  /// Leading trading days excluded before the first feature row. The default
  /// mirrors the reference sample convention (burn-in of 257 days plus the
  /// final target day, i.e. n_days - 258 rows per firm). Values below the
  /// computed minimum lookback chain are ignored in favor of that minimum.
  int warmup_days = 257;
};

/// Sum of the exponential weights e^-1 ... e^-L (0.58195... for L = 10).
double ewma_weight_sum(int lookback);

/// Smallest day index with every lookback window fully populated.
int min_feature_day(const FactorConfig& config);

/// Day index of the first emitted feature row: max(warmup, minimum chain).
int first_feature_day(const FactorConfig& config);

/// Rolling regression output for one (firm, day): coefficients for
/// {intercept, EPS, MKT, INT, GDP}, their two-sided p-values, and the
/// significance-filter flags applied when the coefficients are used.
struct ValuationCoefficients {
  int firm = 0;
  int day = 0;
  int window_len = 0;
  std::array<double, 5> alpha{};
  std::array<double, 5> p_values{};
  std::array<bool, 5> zeroed{};
  std::array<bool, 5> degenerate{};  // column dropped as rank-deficient
};

/// One firm's view of the relative-change series used by the valuation fit.
struct FirmChangeSeries {
  std::span<const double> stock_return;  // NaN at index 0
  std::span<const double> eps_change;    // NaN at index 0
  std::span<const double> mkt_return;
  std::span<const double> int_change;
  std::span<const double> gdp_change;
};

ValuationCoefficients fit_valuation_window(const FirmChangeSeries& series, int firm,
                                           int day, const FactorConfig& config);

/// Value estimate: (filtered linear prediction + 1) * previous price.
double project_valuation(const ValuationCoefficients& coeffs, double eps_change,
                         double mkt_return, double int_change, double gdp_change,
                         double prev_price);

/// Relative excess value (Val - P) / Val; positive means undervalued.
double valuation_measure(double val, double price);

/// Today's return minus the normalized exponentially weighted average of the
/// prior `lookback` returns.
double trend(std::span<const double> returns, int day, int lookback = 10);

/// Sample standard deviation of the X+1 returns ending at `day` (divisor X).
double volatility(std::span<const double> returns, int day, int window_x);

/// OLS slope of the `window` returns ending at `day` against the day index,
/// scaled by the window length (annualized for window = 251).
double long_term_trend(std::span<const double> returns, int day, int window = 251);

/// 1 when the price dipped below threshold * recent high and has come back
/// into [threshold * high, high].
int resistance_flag(std::span<const double> prices, int day, const FactorConfig& config = {});

/// Normalized exponentially weighted average of the `lookback` most recent
/// relative turnover changes.
double volume_trend(std::span<const double> turnover, int day, int lookback = 10);

/// Per-observation factor values plus the next-day return target. Rows are
/// firm-major and balanced: the same feature days for every firm
/// (day indices first_day .. first_day + days_per_firm - 1).
struct FeatureMatrix {
  std::vector<std::string> firms;
  std::vector<std::string> day_labels;  // date label per feature day
  int first_day = 0;                    // index into the source panel calendar
  int days_per_firm = 0;

  std::vector<double> valuation;
  std::vector<double> trend;
  std::vector<double> short_volatility;
  std::vector<double> long_volatility;
  std::vector<double> long_term_trend;
  std::vector<double> volume;
  std::vector<double> resistance;  // 0/1
  std::vector<double> target;     // next-day return, never transformed

  int n_firms() const { return static_cast<int>(firms.size()); }
  size_t rows() const { return firms.size() * static_cast<size_t>(days_per_firm); }
  size_t idx(int firm, int row_in_firm) const {
    return static_cast<size_t>(firm) * days_per_firm + static_cast<size_t>(row_in_firm);
  }

  /// Base factor columns by identifier; target excluded.
  static const std::vector<std::string>& base_columns();
  std::span<const double> column(const std::string& name) const;
  std::span<double> column(const std::string& name);
};

FeatureMatrix build_features(const PanelDataset& data, const FactorConfig& config = {},
                             int threads = 1);

std::string render_features_csv(const FeatureMatrix& features);
FeatureMatrix parse_features_csv(std::istream& in);
FeatureMatrix parse_features_csv_file(const std::string& path);

}  // namespace paneldyn
