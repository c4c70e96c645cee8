#include "paneldyn/factors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/parallel.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void need_history(bool ok, const std::string& what, int day) {
  if (!ok)
    raise(errc::insufficient_history,
          what + ": not enough history at day index " + std::to_string(day));
}

/// 1-based position of each date within its calendar year, read off the
/// YYYY prefix of the label. Used only by the forecast blend.
std::vector<int> trading_day_of_year(const std::vector<std::string>& dates) {
  std::vector<int> d(dates.size(), 1);
  std::string year;
  int counter = 0;
  for (size_t t = 0; t < dates.size(); ++t) {
    std::string y = dates[t].size() >= 4 ? dates[t].substr(0, 4) : dates[t];
    if (y != year) {
      year = std::move(y);
      counter = 0;
    }
    d[t] = ++counter;
  }
  return d;
}

}  // namespace

double ewma_weight_sum(int lookback) {
  double acc = 0.0;
  for (int k = 1; k <= lookback; ++k) acc += std::exp(-static_cast<double>(k));
  return acc;
}

int min_feature_day(const FactorConfig& c) {
  const int valuation = c.window_includes_t ? c.val_window : c.val_window + 1;
  int chain = valuation;
  chain = std::max(chain, c.trend_lookback + 1);
  chain = std::max(chain, c.vol_short + 1);
  chain = std::max(chain, c.vol_long + 1);
  chain = std::max(chain, c.ltt_window);
  chain = std::max(chain, c.res_high_start);
  chain = std::max(chain, c.volume_lookback);
  return chain;
}

int first_feature_day(const FactorConfig& c) {
  return std::max(min_feature_day(c), c.warmup_days);
}

ValuationCoefficients fit_valuation_window(const FirmChangeSeries& series, int firm,
                                           int day, const FactorConfig& config) {
  const int w = config.val_window;
  const int last = config.window_includes_t ? day : day - 1;
  const int first = last - w + 1;
  const int n_days = static_cast<int>(series.stock_return.size());
  need_history(first >= 1 && last < n_days && day < n_days, "valuation window", day);

  Eigen::MatrixXd x(w, 5);
  Eigen::VectorXd y(w);
  for (int s = 0; s < w; ++s) {
    const int t = first + s;
    x(s, 0) = 1.0;
    x(s, 1) = series.eps_change[t];
    x(s, 2) = series.mkt_return[t];
    x(s, 3) = series.int_change[t];
    x(s, 4) = series.gdp_change[t];
    y(s) = series.stock_return[t];
    if (!x.row(s).allFinite() || !std::isfinite(y(s)))
      raise(errc::insufficient_history,
            "valuation window touches undefined relative changes at day " +
                std::to_string(t));
  }

  ValuationCoefficients out;
  out.firm = firm;
  out.day = day;
  out.window_len = w;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivot_qr(x);
  const int rank = static_cast<int>(pivot_qr.rank());
  std::vector<int> kept;
  kept.reserve(5);
  const auto perm = pivot_qr.colsPermutation().indices();
  for (int j = 0; j < rank; ++j) kept.push_back(perm(j));
  std::sort(kept.begin(), kept.end());

  std::array<bool, 5> is_kept{};
  for (int j : kept) is_kept[j] = true;
  for (int j = 0; j < 5; ++j) {
    if (!is_kept[j]) {
      out.alpha[j] = 0.0;
      out.p_values[j] = 1.0;
      out.zeroed[j] = true;
      out.degenerate[j] = true;
    }
  }
  if (rank == 0) return out;

  Eigen::MatrixXd xk(w, rank);
  for (int j = 0; j < rank; ++j) xk.col(j) = x.col(kept[j]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(xk);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - xk * beta;
  const double rss = resid.squaredNorm();
  const int dof = w - rank;
  const double sigma2 = dof > 0 ? rss / dof : 0.0;

  const Eigen::MatrixXd r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));
  const Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();

  for (int j = 0; j < rank; ++j) {
    const int col = kept[j];
    out.alpha[col] = beta(j);
    const double var = sigma2 * xtx_inv(j, j);
    if (var <= 0.0 || dof <= 0) {
      // Exact fit: a nonzero coefficient is unambiguous, a zero one is not.
      out.p_values[col] = std::fabs(beta(j)) > 1e-12 ? 0.0 : 1.0;
    } else {
      const double t_stat = beta(j) / std::sqrt(var);
      out.p_values[col] = student_t_two_sided_p(std::fabs(t_stat), dof);
    }
    const bool filtered = (col == 0 && !config.filter_intercept)
                              ? false
                              : out.p_values[col] >= config.significance_alpha;
    out.zeroed[col] = filtered;
  }
  return out;
}

double project_valuation(const ValuationCoefficients& coeffs, double eps_change,
                         double mkt_return, double int_change, double gdp_change,
                         double prev_price) {
  if (!(prev_price > 0.0))
    raise(errc::non_positive_price, "valuation projection needs a positive prior price");
  const auto term = [&](int j, double value) {
    return coeffs.zeroed[j] ? 0.0 : coeffs.alpha[j] * value;
  };
  const double fitted = term(0, 1.0) + term(1, eps_change) + term(2, mkt_return) +
                        term(3, int_change) + term(4, gdp_change);
  return (fitted + 1.0) * prev_price;
}

double valuation_measure(double val, double price) {
  if (std::fabs(val) < 1e-9 * std::fabs(price))
    raise(errc::degenerate_valuation, "value estimate too close to zero");
  return (val - price) / val;
}

double trend(std::span<const double> returns, int day, int lookback) {
  need_history(day - lookback >= 1 && day < static_cast<int>(returns.size()), "trend", day);
  const double norm = ewma_weight_sum(lookback);
  double weighted = 0.0;
  for (int k = 1; k <= lookback; ++k)
    weighted += std::exp(-static_cast<double>(k)) * returns[day - k];
  return returns[day] - weighted / norm;
}

double volatility(std::span<const double> returns, int day, int window_x) {
  need_history(day - window_x >= 1 && day < static_cast<int>(returns.size()),
               "volatility", day);
  double acc = 0.0;
  for (int k = day - window_x; k <= day; ++k) acc += returns[k];
  const double m = acc / (window_x + 1);
  double ss = 0.0;
  for (int k = day - window_x; k <= day; ++k) {
    const double d = returns[k] - m;
    ss += d * d;
  }
  return std::sqrt(ss / window_x);
}

double long_term_trend(std::span<const double> returns, int day, int window) {
  need_history(day - window + 1 >= 1 && day < static_cast<int>(returns.size()),
               "long-term trend", day);
  // Closed-form OLS slope against the index 1..window.
  const double n = window;
  const double mean_k = (n + 1.0) / 2.0;
  double mean_r = 0.0;
  for (int s = 0; s < window; ++s) mean_r += returns[day - window + 1 + s];
  mean_r /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int s = 0; s < window; ++s) {
    const double dk = (s + 1) - mean_k;
    sxy += dk * (returns[day - window + 1 + s] - mean_r);
    sxx += dk * dk;
  }
  return sxy / sxx * n;
}

int resistance_flag(std::span<const double> prices, int day, const FactorConfig& config) {
  need_history(day - config.res_high_start >= 0 && day < static_cast<int>(prices.size()),
               "resistance", day);
  double high = -std::numeric_limits<double>::infinity();
  for (int s = day - config.res_high_start; s <= day - config.res_high_end; ++s)
    high = std::max(high, prices[s]);
  const double floor = config.resistance_threshold * high;
  for (int s = day - config.res_dip_start; s <= day - config.res_dip_end; ++s)
    if (!(prices[s] <= floor)) return 0;
  return (floor <= prices[day] && prices[day] <= high) ? 1 : 0;
}

double volume_trend(std::span<const double> turnover, int day, int lookback) {
  need_history(day - lookback >= 0 && day < static_cast<int>(turnover.size()),
               "volume trend", day);
  for (int s = day - lookback; s <= day; ++s)
    if (!(turnover[s] > 0.0))
      raise(errc::non_positive_turnover,
            "turnover must be positive inside the volume window (day " +
                std::to_string(s) + ")");
  const double norm = ewma_weight_sum(lookback);
  double weighted = 0.0;
  for (int k = 1; k <= lookback; ++k) {
    const double change =
        (turnover[day - k + 1] - turnover[day - k]) / turnover[day - k];
    weighted += std::exp(-static_cast<double>(k)) * change;
  }
  return weighted / norm;
}

const std::vector<std::string>& FeatureMatrix::base_columns() {
  static const std::vector<std::string> cols = {
      "valuation",       "trend",  "short_volatility", "long_volatility",
      "long_term_trend", "volume", "resistance"};
  return cols;
}

std::span<const double> FeatureMatrix::column(const std::string& name) const {
  auto* self = const_cast<FeatureMatrix*>(this);
  return self->column(name);
}

std::span<double> FeatureMatrix::column(const std::string& name) {
  if (name == "valuation") return valuation;
  if (name == "trend") return trend;
  if (name == "short_volatility") return short_volatility;
  if (name == "long_volatility") return long_volatility;
  if (name == "long_term_trend") return long_term_trend;
  if (name == "volume") return volume;
  if (name == "resistance") return resistance;
  if (name == "target") return target;
  raise(errc::missing_column, "unknown feature column '" + name + "'");
}

FeatureMatrix build_features(const PanelDataset& data, const FactorConfig& config,
                             int threads) {
  data.validate();
  const int n_days = data.n_days();
  const int first = first_feature_day(config);
  const int last = n_days - 2;  // the final date only supplies the target
  if (first > last)
    raise(errc::insufficient_history,
          "panel too short: first feature day " + std::to_string(first) +
              " needs at least " + std::to_string(first + 2) + " dates, have " +
              std::to_string(n_days));

  // Relative-change inputs for the valuation fit, optionally with the
  // day-weighted FY1/FY2 blend.
  RelativeChanges rc = compute_relative_changes(data);
  if (config.blend_forecasts) {
    if (!data.has_eps_fy2() || !data.has_gdp_fy2())
      raise(errc::missing_column,
            "forecast blending requires eps_fy2 and gdp_fy2 columns");
    const std::vector<int> doy = trading_day_of_year(data.dates);
    auto weight = [&](int t) {
      const double d = std::min(doy[t], 252);
      return (252.0 - d) / 252.0;
    };
    std::vector<double> blended_eps(data.size());
    for (int i = 0; i < data.n_firms(); ++i)
      for (int t = 0; t < n_days; ++t) {
        const size_t k = data.idx(i, t);
        blended_eps[k] = weight(t) * data.eps_fy1[k] + (1.0 - weight(t)) * data.eps_fy2[k];
      }
    std::vector<double> blended_gdp(n_days);
    for (int t = 0; t < n_days; ++t)
      blended_gdp[t] = weight(t) * data.gdp_fy1[t] + (1.0 - weight(t)) * data.gdp_fy2[t];
    for (int i = 0; i < data.n_firms(); ++i) {
      rc.eps_change[data.idx(i, 0)] = kNaN;
      for (int t = 1; t < n_days; ++t) {
        const size_t k = data.idx(i, t);
        if (blended_eps[k - 1] == 0.0)
          raise(errc::degenerate_series, "blended EPS forecast hit zero");
        rc.eps_change[k] = (blended_eps[k] - blended_eps[k - 1]) / blended_eps[k - 1];
      }
    }
    rc.gdp_change[0] = kNaN;
    for (int t = 1; t < n_days; ++t) {
      if (blended_gdp[t - 1] == 0.0)
        raise(errc::degenerate_series, "blended GDP forecast hit zero");
      rc.gdp_change[t] = (blended_gdp[t] - blended_gdp[t - 1]) / blended_gdp[t - 1];
    }
  }

  FeatureMatrix fm;
  fm.firms = data.firms;
  fm.first_day = first;
  fm.days_per_firm = last - first + 1;
  fm.day_labels.assign(data.dates.begin() + first, data.dates.begin() + last + 1);
  const size_t rows = fm.rows();
  fm.valuation.resize(rows);
  fm.trend.resize(rows);
  fm.short_volatility.resize(rows);
  fm.long_volatility.resize(rows);
  fm.long_term_trend.resize(rows);
  fm.volume.resize(rows);
  fm.resistance.resize(rows);
  fm.target.resize(rows);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(data.n_firms(), threads, [&](int i) {
    try {
      const FirmChangeSeries series{
          data.firm_series(rc.stock_return, i), data.firm_series(rc.eps_change, i),
          rc.mkt_return, rc.int_change, rc.gdp_change};
      const auto prices = data.firm_series(data.close, i);
      const auto turn = data.firm_series(data.turnover, i);
      const auto returns = series.stock_return;
      for (int t = first; t <= last; ++t) {
        const size_t k = fm.idx(i, t - first);
        const ValuationCoefficients coeffs = fit_valuation_window(series, i, t, config);
        const double val = project_valuation(coeffs, series.eps_change[t],
                                             rc.mkt_return[t], rc.int_change[t],
                                             rc.gdp_change[t], prices[t - 1]);
        fm.valuation[k] = valuation_measure(val, prices[t]);
        fm.trend[k] = trend(returns, t, config.trend_lookback);
        fm.short_volatility[k] = volatility(returns, t, config.vol_short);
        fm.long_volatility[k] = volatility(returns, t, config.vol_long);
        fm.long_term_trend[k] = long_term_trend(returns, t, config.ltt_window);
        fm.volume[k] = volume_trend(turn, t, config.volume_lookback);
        fm.resistance[k] = resistance_flag(prices, t, config);
        fm.target[k] = returns[t + 1];
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return fm;
}

std::string render_features_csv(const FeatureMatrix& fm) {
  std::string out =
      "firm,date,valuation,trend,short_volatility,long_volatility,long_term_trend,"
      "volume,resistance,target\n";
  for (int i = 0; i < fm.n_firms(); ++i) {
    for (int r = 0; r < fm.days_per_firm; ++r) {
      const size_t k = fm.idx(i, r);
      out += fm.firms[i];
      out += ',';
      out += fm.day_labels[r];
      for (const double v : {fm.valuation[k], fm.trend[k], fm.short_volatility[k],
                             fm.long_volatility[k], fm.long_term_trend[k], fm.volume[k],
                             fm.resistance[k], fm.target[k]}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

FeatureMatrix parse_features_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const int c_firm = table.require("firm");
  const int c_date = table.require("date");
  std::array<int, 8> cols{};
  const char* names[8] = {"valuation",       "trend",  "short_volatility",
                          "long_volatility", "long_term_trend", "volume",
                          "resistance",      "target"};
  for (int j = 0; j < 8; ++j) cols[j] = table.require(names[j]);

  FeatureMatrix fm;
  std::vector<std::vector<std::array<double, 8>>> per_firm_values;
  std::vector<std::vector<std::string>> per_firm_dates;
  std::map<std::string, int> firm_id;
  size_t file_row = 1;
  for (const auto& row : table.rows) {
    ++file_row;
    auto [it, inserted] = firm_id.emplace(row[c_firm], static_cast<int>(fm.firms.size()));
    if (inserted) {
      fm.firms.push_back(row[c_firm]);
      per_firm_values.emplace_back();
      per_firm_dates.emplace_back();
    }
    std::array<double, 8> vals{};
    for (int j = 0; j < 8; ++j)
      vals[j] = parse_number(row[cols[j]], file_row, names[j]);
    per_firm_values[it->second].push_back(vals);
    per_firm_dates[it->second].push_back(row[c_date]);
  }
  if (fm.firms.empty()) raise(errc::parse_failure, "feature file has no rows");
  fm.days_per_firm = static_cast<int>(per_firm_values[0].size());
  fm.day_labels = per_firm_dates[0];
  for (size_t i = 1; i < per_firm_values.size(); ++i) {
    if (per_firm_dates[i] != fm.day_labels)
      raise(errc::unbalanced_panel,
            "feature rows for firm " + fm.firms[i] + " do not match the calendar");
  }
  const size_t rows = fm.rows();
  fm.valuation.resize(rows);
  fm.trend.resize(rows);
  fm.short_volatility.resize(rows);
  fm.long_volatility.resize(rows);
  fm.long_term_trend.resize(rows);
  fm.volume.resize(rows);
  fm.resistance.resize(rows);
  fm.target.resize(rows);
  for (int i = 0; i < fm.n_firms(); ++i) {
    for (int r = 0; r < fm.days_per_firm; ++r) {
      const auto& v = per_firm_values[i][r];
      const size_t k = fm.idx(i, r);
      fm.valuation[k] = v[0];
      fm.trend[k] = v[1];
      fm.short_volatility[k] = v[2];
      fm.long_volatility[k] = v[3];
      fm.long_term_trend[k] = v[4];
      fm.volume[k] = v[5];
      fm.resistance[k] = v[6];
      fm.target[k] = v[7];
    }
  }
  return fm;
}

FeatureMatrix parse_features_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open '" + path + "'");
  return parse_features_csv(in);
}

}  // namespace paneldyn
