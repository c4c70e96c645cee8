#include "paneldyn/prep.hpp"

#include <algorithm>
#include <cmath>

#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

/// Winsorization cut points: interpolated quantiles snapped to the nearest
/// observation inside [lower, upper]. Snapping keeps the bounds members of
/// the data, so a second pass is a no-op.
std::pair<double, double> winsor_bounds(std::span<const double> values, double lower_pct,
                                        double upper_pct) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q_lo = quantile_sorted(sorted, lower_pct);
  const double q_hi = quantile_sorted(sorted, upper_pct);
  const auto lo_it = std::lower_bound(sorted.begin(), sorted.end(), q_lo);
  const auto hi_it = std::upper_bound(sorted.begin(), sorted.end(), q_hi);
  const double lo = lo_it != sorted.end() ? *lo_it : q_lo;
  const double hi = hi_it != sorted.begin() ? *(hi_it - 1) : q_hi;
  if (!(lo <= hi)) return {sorted.front(), sorted.back()};  // degenerate tiny column
  return {lo, hi};
}

}  // namespace

void winsorize_in_place(std::span<double> values, double lower_pct, double upper_pct) {
  if (values.empty()) raise(errc::too_few_observations, "winsorize of empty column");
  if (!(0.0 <= lower_pct && lower_pct < upper_pct && upper_pct <= 1.0))
    raise(errc::invalid_config, "winsorize percentiles must satisfy 0 <= lower < upper <= 1");
  const auto [lo, hi] = winsor_bounds(values, lower_pct, upper_pct);
  for (double& v : values) v = std::clamp(v, lo, hi);
}

std::vector<double> winsorize(std::span<const double> values, double lower_pct,
                              double upper_pct) {
  std::vector<double> out(values.begin(), values.end());
  winsorize_in_place(out, lower_pct, upper_pct);
  return out;
}

FeatureMatrix standardize_by_firm(const FeatureMatrix& features, bool resistance_exempt) {
  FeatureMatrix out = features;
  for (const auto& name : FeatureMatrix::base_columns()) {
    if (resistance_exempt && name == "resistance") continue;
    auto col = out.column(name);
    for (int i = 0; i < out.n_firms(); ++i) {
      auto firm_col = col.subspan(out.idx(i, 0), out.days_per_firm);
      const double m = mean(firm_col);
      const double sd = sample_sd(firm_col, m);
      if (!(sd > 1e-300))
        raise(errc::zero_variance, "firm " + out.firms[i] + ", feature '" + name +
                                       "': zero variance, cannot standardize");
      for (double& v : firm_col) v = (v - m) / sd;
    }
  }
  return out;
}

FeatureMatrix prepare(const FeatureMatrix& features, const PrepConfig& config) {
  FeatureMatrix out = features;
  if (config.winsorize_enabled) {
    for (const auto& name : FeatureMatrix::base_columns()) {
      if (config.resistance_exempt && name == "resistance") continue;
      auto col = out.column(name);
      if (config.per_firm_quantiles) {
        for (int i = 0; i < out.n_firms(); ++i)
          winsorize_in_place(col.subspan(out.idx(i, 0), out.days_per_firm),
                             config.lower_pct, config.upper_pct);
      } else {
        winsorize_in_place(col, config.lower_pct, config.upper_pct);
      }
    }
  }
  if (config.standardize_enabled)
    out = standardize_by_firm(out, config.resistance_exempt);
  return out;
}

ModelId parse_model_id(const std::string& text) {
  if (text == "1V" || text == "1v") return ModelId::m1v;
  if (text == "1T" || text == "1t") return ModelId::m1t;
  if (text == "2") return ModelId::m2;
  if (text == "2X" || text == "2x") return ModelId::m2x;
  if (text == "3") return ModelId::m3;
  if (text == "4") return ModelId::m4;
  raise(errc::unknown_model, "unknown model id '" + text + "' (expected 1V, 1T, 2, 2X, 3, 4)");
}

const char* model_name(ModelId id) {
  switch (id) {
    case ModelId::m1v: return "1V";
    case ModelId::m1t: return "1T";
    case ModelId::m2: return "2";
    case ModelId::m2x: return "2X";
    case ModelId::m3: return "3";
    case ModelId::m4: return "4";
  }
  return "?";
}

const std::vector<std::string>& model_terms(ModelId id) {
  static const std::vector<std::string> m1v = {"valuation"};
  static const std::vector<std::string> m1t = {"trend"};
  static const std::vector<std::string> m2 = {"valuation", "trend"};
  static const std::vector<std::string> m2x = {"valuation", "trend", "trend_x_valuation"};
  static const std::vector<std::string> m3 = {
      "valuation",         "valuation_sq",        "valuation_cu",
      "trend",             "trend_sq",            "trend_cu",
      "trend_x_valuation", "trend_sq_x_valuation", "trend_x_valuation_sq"};
  static const std::vector<std::string> m4 = [] {
    std::vector<std::string> t = m3;
    t.insert(t.end(), {"short_volatility", "long_volatility", "long_term_trend",
                       "volume", "resistance"});
    return t;
  }();
  switch (id) {
    case ModelId::m1v: return m1v;
    case ModelId::m1t: return m1t;
    case ModelId::m2: return m2;
    case ModelId::m2x: return m2x;
    case ModelId::m3: return m3;
    case ModelId::m4: return m4;
  }
  raise(errc::unknown_model, "bad model id");
}

std::string term_display_name(const std::string& term) {
  if (term == "valuation") return "Valuation";
  if (term == "valuation_sq") return "(Valuation)^2";
  if (term == "valuation_cu") return "(Valuation)^3";
  if (term == "trend") return "Price Trend";
  if (term == "trend_sq") return "(Price Trend)^2";
  if (term == "trend_cu") return "(Price Trend)^3";
  if (term == "trend_x_valuation") return "Price Trend x Valuation";
  if (term == "trend_sq_x_valuation") return "Price Trend^2 x Valuation";
  if (term == "trend_x_valuation_sq") return "Price Trend x Valuation^2";
  if (term == "short_volatility") return "Short Term Volatility";
  if (term == "long_volatility") return "Long Term Volatility";
  if (term == "long_term_trend") return "Long Term Trend";
  if (term == "volume") return "Volume";
  if (term == "resistance") return "Resistance";
  return term;
}

double expand_term(const std::string& term, double v, double t, double short_vol,
                   double long_vol, double ltt, double volume, double resistance) {
  if (term == "valuation") return v;
  if (term == "valuation_sq") return v * v;
  if (term == "valuation_cu") return v * v * v;
  if (term == "trend") return t;
  if (term == "trend_sq") return t * t;
  if (term == "trend_cu") return t * t * t;
  if (term == "trend_x_valuation") return t * v;
  if (term == "trend_sq_x_valuation") return t * t * v;
  if (term == "trend_x_valuation_sq") return t * v * v;
  if (term == "short_volatility") return short_vol;
  if (term == "long_volatility") return long_vol;
  if (term == "long_term_trend") return ltt;
  if (term == "volume") return volume;
  if (term == "resistance") return resistance;
  raise(errc::unknown_model, "unknown regressor term '" + term + "'");
}

Eigen::MatrixXd polynomial_expand(const FeatureMatrix& fm, ModelId id) {
  const auto& terms = model_terms(id);
  const size_t n = fm.rows();
  Eigen::MatrixXd x(n, terms.size());
  for (size_t r = 0; r < n; ++r) {
    const double v = fm.valuation[r];
    const double t = fm.trend[r];
    for (size_t j = 0; j < terms.size(); ++j)
      x(r, j) = expand_term(terms[j], v, t, fm.short_volatility[r], fm.long_volatility[r],
                            fm.long_term_trend[r], fm.volume[r], fm.resistance[r]);
  }
  return x;
}

}  // namespace paneldyn
