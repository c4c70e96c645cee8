#include "paneldyn/synth.hpp"

#include <cmath>

#include "paneldyn/errors.hpp"
#include "paneldyn/prep.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {
namespace synth {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

uint64_t mix64(uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream identifiers; a stream plus (firm, day, counter) keys one draw.
enum Stream : uint64_t {
  kIdio = 1,
  kFirmEffect,
  kTimeEffect,
  kResistance,
  kBaseFeature,  // + feature index
  kPrice = 32,
  kTurnover,
  kEps,
  kGdp,
  kSpx,
  kYield,
  kPriceInit,
  kTurnoverInit,
  kEpsInit,
  kEpsRevise,
  kGdpRevise,
  kMktcapInit,
};

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return d[m - 1];
}

// Weekday via Sakamoto's method; 0 = Sunday.
int weekday(int y, int m, int d) {
  static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  if (m < 3) y -= 1;
  return (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
}

/// Synthetic trading calendar: consecutive weekdays from `start` (no holiday
/// schedule). Labels are ISO dates so they sort lexicographically.
std::vector<std::string> trading_calendar(const std::string& start, int n_days) {
  int y = 2005, m = 1, d = 3;
  if (start.size() == 10) {
    y = std::stoi(start.substr(0, 4));
    m = std::stoi(start.substr(5, 2));
    d = std::stoi(start.substr(8, 2));
  }
  std::vector<std::string> dates;
  dates.reserve(n_days);
  while (static_cast<int>(dates.size()) < n_days) {
    const int wd = weekday(y, m, d);
    if (wd != 0 && wd != 6) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
      dates.emplace_back(buf);
    }
    if (++d > days_in_month(y, m)) {
      d = 1;
      if (++m > 12) {
        m = 1;
        ++y;
      }
    }
  }
  return dates;
}

}  // namespace

uint64_t CounterRng::word(uint64_t firm, uint64_t day, uint64_t stream,
                          uint64_t counter) const {
  uint64_t h = mix64(seed_ ^ 0x853c49e6748fea9bULL);
  h = mix64(h ^ firm);
  h = mix64(h ^ (day * 0xda942042e4dd58b5ULL));
  h = mix64(h ^ (stream * 0xe7037ed1a0b428dbULL));
  h = mix64(h ^ counter);
  return h;
}

double CounterRng::uniform(uint64_t firm, uint64_t day, uint64_t stream,
                           uint64_t counter) const {
  const uint64_t w = word(firm, day, stream, counter);
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(uint64_t firm, uint64_t day, uint64_t stream,
                          uint64_t counter) const {
  return normal_quantile(uniform(firm, day, stream, counter));
}

SyntheticFeaturePanel generate_feature_panel(const SynthConfig& config) {
  if (config.n_firms < 2 || config.n_days < 2)
    raise(errc::invalid_config, "synthetic panel needs at least 2 firms and 2 days");
  for (const auto& [term, value] : config.beta) {
    (void)value;
    expand_term(term, 0, 0, 0, 0, 0, 0, 0);  // validates the identifier
  }

  const CounterRng rng(config.seed);
  const int nf = config.n_firms, nd = config.n_days;

  SyntheticFeaturePanel out;
  FeatureMatrix& fm = out.features;
  fm.firms.reserve(nf);
  for (int i = 0; i < nf; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "F%03d", i);
    fm.firms.emplace_back(buf);
  }
  fm.day_labels = trading_calendar("2006-01-03", nd);
  fm.first_day = 0;
  fm.days_per_firm = nd;
  const size_t rows = fm.rows();
  fm.valuation.resize(rows);
  fm.trend.resize(rows);
  fm.short_volatility.resize(rows);
  fm.long_volatility.resize(rows);
  fm.long_term_trend.resize(rows);
  fm.volume.resize(rows);
  fm.resistance.resize(rows);
  fm.target.resize(rows);

  out.truth.beta = config.beta;
  out.truth.firm_effects.resize(nf);
  out.truth.time_effects.resize(nd);
  for (int i = 0; i < nf; ++i)
    out.truth.firm_effects[i] = config.firm_effect_sd * rng.normal(i, 0, kFirmEffect);
  for (int t = 0; t < nd; ++t)
    out.truth.time_effects[t] = config.time_effect_sd * rng.normal(0, t, kTimeEffect);

  std::span<double> base_cols[6] = {fm.valuation,      fm.trend,
                                    fm.short_volatility, fm.long_volatility,
                                    fm.long_term_trend, fm.volume};
  for (int i = 0; i < nf; ++i) {
    for (int t = 0; t < nd; ++t) {
      const size_t k = fm.idx(i, t);
      for (int f = 0; f < 6; ++f)
        base_cols[f][k] = rng.normal(i, t, kBaseFeature + f);
      fm.resistance[k] =
          rng.uniform(i, t, kResistance) < config.resistance_prob ? 1.0 : 0.0;
      double signal = 0.0;
      for (const auto& [term, beta] : config.beta)
        signal += beta * expand_term(term, fm.valuation[k], fm.trend[k],
                                     fm.short_volatility[k], fm.long_volatility[k],
                                     fm.long_term_trend[k], fm.volume[k],
                                     fm.resistance[k]);
      fm.target[k] = signal + out.truth.firm_effects[i] + out.truth.time_effects[t] +
                     config.idio_sd * rng.normal(i, t, kIdio);
    }
  }
  return out;
}

PanelDataset generate_raw_panel(const RawSynthConfig& config) {
  if (config.n_firms < 1 || config.n_days < 2)
    raise(errc::invalid_config, "raw panel needs at least 1 firm and 2 days");
  const CounterRng rng(config.seed);
  const int nf = config.n_firms, nd = config.n_days;

  PanelDataset data;
  data.firms.reserve(nf);
  for (int i = 0; i < nf; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "SYN%03d", i);
    data.firms.emplace_back(buf);
  }
  data.dates = trading_calendar(config.start_date, nd);

  // Macro series first (shared across firms).
  data.spx.resize(nd);
  data.ust10y.resize(nd);
  data.gdp_fy1.resize(nd);
  if (config.emit_gdp_fy2) data.gdp_fy2.resize(nd);
  std::vector<double> mkt_return(nd, 0.0);
  double spx = config.spx_level;
  double yield = config.yield_level;
  double gdp = config.gdp_level;
  double gdp2 = config.gdp_level * 1.02;
  for (int t = 0; t < nd; ++t) {
    if (t > 0) {
      const double r = config.spx_drift + config.spx_vol * rng.normal(0, t, kSpx);
      mkt_return[t] = std::max(r, -0.5);
      spx *= 1.0 + mkt_return[t];
      yield *= std::exp(config.yield_vol * rng.normal(0, t, kYield));
      if (rng.uniform(0, t, kGdpRevise) < config.gdp_revision_prob)
        gdp *= 1.0 + config.gdp_revision_vol * rng.normal(0, t, kGdp);
      if (rng.uniform(0, t, kGdpRevise, 1) < config.gdp_revision_prob)
        gdp2 *= 1.0 + config.gdp_revision_vol * rng.normal(0, t, kGdp, 1);
    }
    data.spx[t] = spx;
    data.ust10y[t] = yield;
    data.gdp_fy1[t] = gdp;
    if (config.emit_gdp_fy2) data.gdp_fy2[t] = gdp2;
  }

  const size_t cells = data.firms.size() * data.dates.size();
  data.close.resize(cells);
  data.turnover.resize(cells);
  data.eps_fy1.resize(cells);
  if (config.emit_eps_fy2) data.eps_fy2.resize(cells);
  if (config.emit_mktcap) data.mktcap.resize(cells);

  const int trend_lb = 10;
  const double norm = ewma_weight_sum(trend_lb);
  // Reduced trend cubic used when feedback is enabled.
  const double fb_lin = 0.721e-3, fb_cub = -0.090e-3;

  for (int i = 0; i < nf; ++i) {
    double price =
        config.price_level * std::exp(0.4 * rng.normal(i, 0, kPriceInit));
    double turn =
        config.turnover_level * std::exp(0.6 * rng.normal(i, 0, kTurnoverInit));
    double eps = config.eps_level * std::exp(0.3 * rng.normal(i, 0, kEpsInit));
    double eps2 = eps * 1.05;
    double mcap = config.mktcap_level * std::exp(0.8 * rng.normal(i, 0, kMktcapInit));
    std::vector<double> returns(nd, 0.0);
    for (int t = 0; t < nd; ++t) {
      if (t > 0) {
        double r = config.price_drift + config.market_beta * mkt_return[t] +
                   config.price_vol * rng.normal(i, t, kPrice);
        if (config.cubic_feedback > 0.0 && t > trend_lb + 1) {
          double weighted = 0.0;
          for (int k = 1; k <= trend_lb; ++k)
            weighted += std::exp(-static_cast<double>(k)) * returns[t - 1 - k];
          const double trend_sd =
              (returns[t - 1] - weighted / norm) / config.feedback_scale;
          r += config.cubic_feedback *
               (fb_lin * trend_sd + fb_cub * trend_sd * trend_sd * trend_sd);
        }
        r = std::max(r, -0.5);
        returns[t] = r;
        price *= 1.0 + r;
        turn *= std::exp(config.turnover_vol * rng.normal(i, t, kTurnover));
        if (rng.uniform(i, t, kEpsRevise) < config.eps_revision_prob)
          eps *= 1.0 + config.eps_revision_vol * rng.normal(i, t, kEps);
        if (rng.uniform(i, t, kEpsRevise, 1) < config.eps_revision_prob)
          eps2 *= 1.0 + config.eps_revision_vol * rng.normal(i, t, kEps, 1);
        mcap *= 1.0 + returns[t];
      }
      const size_t k = data.idx(i, t);
      data.close[k] = price;
      data.turnover[k] = turn;
      data.eps_fy1[k] = eps;
      if (config.emit_eps_fy2) data.eps_fy2[k] = eps2;
      if (config.emit_mktcap) data.mktcap[k] = mcap;
    }
  }
  data.validate();
  return data;
}

Eigen::VectorXd oracle_lsdv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            PanelShape shape) {
  const int nf = shape.n_firms, nd = shape.n_days;
  if (x.rows() != shape.n() || y.size() != shape.n())
    raise(errc::unbalanced_panel, "LSDV oracle needs a balanced panel");
  const int k = static_cast<int>(x.cols());
  const int cols = k + (nf - 1) + (nd - 1) + 1;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(shape.n(), cols);
  design.leftCols(k) = x;
  for (int i = 0; i < nf; ++i) {
    for (int t = 0; t < nd; ++t) {
      const int r = i * nd + t;
      if (i > 0) design(r, k + i - 1) = 1.0;
      if (t > 0) design(r, k + (nf - 1) + t - 1) = 1.0;
      design(r, cols - 1) = 1.0;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols)
    raise(errc::rank_deficient, "LSDV design is rank deficient");
  const Eigen::VectorXd full = qr.solve(y);
  return full.head(k);
}

}  // namespace synth
}  // namespace paneldyn
