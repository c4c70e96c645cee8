#include "paneldyn/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "paneldyn/csv.hpp"
#include "paneldyn/errors.hpp"
#include "paneldyn/stats.hpp"

namespace paneldyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rel_change(double current, double prior) {
  if (prior == 0.0)
    raise(errc::degenerate_series, "relative change undefined: prior value is zero");
  return (current - prior) / prior;
}

}  // namespace

void PanelDataset::validate() const {
  if (firms.empty() || dates.empty())
    raise(errc::unbalanced_panel, "panel has no firms or no dates");
  for (size_t t = 1; t < dates.size(); ++t)
    if (!(dates[t - 1] < dates[t]))
      raise(errc::parse_failure, "calendar not strictly increasing at '" + dates[t] + "'");
  const size_t expected = size();
  if (close.size() != expected || turnover.size() != expected || eps_fy1.size() != expected)
    raise(errc::unbalanced_panel, "per-firm series sized inconsistently with firms x dates");
  for (int i = 0; i < n_firms(); ++i) {
    for (int t = 0; t < n_days(); ++t) {
      const size_t k = idx(i, t);
      if (!(close[k] > 0.0))
        raise(errc::non_positive_price,
              "firm " + firms[i] + " date " + dates[t] + ": adjusted close must be > 0");
      if (turnover[k] < 0.0)
        raise(errc::non_positive_turnover,
              "firm " + firms[i] + " date " + dates[t] + ": turnover must be >= 0");
      if (!std::isfinite(close[k]) || !std::isfinite(turnover[k]) || !std::isfinite(eps_fy1[k]))
        raise(errc::parse_failure,
              "firm " + firms[i] + " date " + dates[t] + ": non-finite value");
    }
  }
  if (spx.size() != dates.size() || ust10y.size() != dates.size() ||
      gdp_fy1.size() != dates.size())
    raise(errc::unbalanced_panel, "macro series do not cover the panel calendar");
}

PanelDataset PanelDataset::truncated(int keep_days) const {
  if (keep_days < 1 || keep_days > n_days())
    raise(errc::invalid_config, "truncation length outside panel calendar");
  PanelDataset out;
  out.firms = firms;
  out.dates.assign(dates.begin(), dates.begin() + keep_days);
  auto cut_panel = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    dst.reserve(firms.size() * static_cast<size_t>(keep_days));
    for (int i = 0; i < n_firms(); ++i) {
      const size_t base = idx(i, 0);
      dst.insert(dst.end(), src.begin() + base, src.begin() + base + keep_days);
    }
  };
  cut_panel(close, out.close);
  cut_panel(turnover, out.turnover);
  cut_panel(eps_fy1, out.eps_fy1);
  cut_panel(eps_fy2, out.eps_fy2);
  cut_panel(mktcap, out.mktcap);
  auto cut_macro = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    dst.assign(src.begin(), src.begin() + keep_days);
  };
  cut_macro(spx, out.spx);
  cut_macro(ust10y, out.ust10y);
  cut_macro(gdp_fy1, out.gdp_fy1);
  cut_macro(gdp_fy2, out.gdp_fy2);
  return out;
}

PanelDataset load_panel(std::istream& firm_csv, std::istream& macro_csv,
                        const PanelSchema& schema) {
  const CsvTable firm_table = read_csv(firm_csv);
  const CsvTable macro_table = read_csv(macro_csv);

  const int c_date = firm_table.require(schema.date);
  const int c_ticker = firm_table.require(schema.ticker);
  const int c_close = firm_table.require(schema.adj_close);
  const int c_turn = firm_table.require(schema.turnover);
  const int c_eps1 = firm_table.require(schema.eps_fy1);
  const int c_eps2 = firm_table.column(schema.eps_fy2);
  const int c_mcap = firm_table.column(schema.mktcap);

  PanelDataset data;

  // First pass: the firm list and date universe.
  std::map<std::string, int> firm_id;
  std::map<std::string, int> date_id;
  for (const auto& row : firm_table.rows) {
    firm_id.emplace(row[c_ticker], 0);
    date_id.emplace(row[c_date], 0);
  }
  data.firms.reserve(firm_id.size());
  for (auto& [name, id] : firm_id) {
    id = static_cast<int>(data.firms.size());
    data.firms.push_back(name);
  }
  data.dates.reserve(date_id.size());
  for (auto& [name, id] : date_id) {
    id = static_cast<int>(data.dates.size());
    data.dates.push_back(name);
  }

  const size_t cells = data.size();
  data.close.assign(cells, kNaN);
  data.turnover.assign(cells, kNaN);
  data.eps_fy1.assign(cells, kNaN);
  if (c_eps2 >= 0) data.eps_fy2.assign(cells, kNaN);
  if (c_mcap >= 0) data.mktcap.assign(cells, kNaN);

  // Second pass: fill cells, catching duplicates.
  size_t file_row = 1;
  for (const auto& row : firm_table.rows) {
    ++file_row;
    const int i = firm_id[row[c_ticker]];
    const int t = date_id[row[c_date]];
    const size_t k = data.idx(i, t);
    if (!std::isnan(data.close[k]))
      raise(errc::unbalanced_panel, "duplicate record for firm " + row[c_ticker] +
                                        " on " + row[c_date]);
    data.close[k] = parse_number(row[c_close], file_row, schema.adj_close);
    data.turnover[k] = parse_number(row[c_turn], file_row, schema.turnover);
    data.eps_fy1[k] = parse_number(row[c_eps1], file_row, schema.eps_fy1);
    if (c_eps2 >= 0) data.eps_fy2[k] = parse_number(row[c_eps2], file_row, schema.eps_fy2);
    if (c_mcap >= 0) data.mktcap[k] = parse_number(row[c_mcap], file_row, schema.mktcap);
  }

  // Balance check: list every missing (firm, date) pair.
  std::string missing;
  int n_missing = 0;
  for (int i = 0; i < data.n_firms(); ++i) {
    for (int t = 0; t < data.n_days(); ++t) {
      if (std::isnan(data.close[data.idx(i, t)])) {
        ++n_missing;
        if (n_missing <= 8) {
          if (!missing.empty()) missing += ", ";
          missing += data.firms[i] + "@" + data.dates[t];
        }
      }
    }
  }
  if (n_missing > 0) {
    if (n_missing > 8) missing += ", ... (" + std::to_string(n_missing) + " total)";
    raise(errc::unbalanced_panel, "panel not balanced; missing: " + missing);
  }

  // Macro file: must cover the full calendar; extra dates are ignored.
  const int m_date = macro_table.require(schema.macro_date);
  const int m_spx = macro_table.require(schema.spx);
  const int m_y10 = macro_table.require(schema.ust10y);
  const int m_gdp1 = macro_table.require(schema.gdp_fy1);
  const int m_gdp2 = macro_table.column(schema.gdp_fy2);

  data.spx.assign(data.dates.size(), kNaN);
  data.ust10y.assign(data.dates.size(), kNaN);
  data.gdp_fy1.assign(data.dates.size(), kNaN);
  if (m_gdp2 >= 0) data.gdp_fy2.assign(data.dates.size(), kNaN);

  file_row = 1;
  for (const auto& row : macro_table.rows) {
    ++file_row;
    const auto it = date_id.find(row[m_date]);
    if (it == date_id.end()) continue;
    const int t = it->second;
    data.spx[t] = parse_number(row[m_spx], file_row, schema.spx);
    data.ust10y[t] = parse_number(row[m_y10], file_row, schema.ust10y);
    data.gdp_fy1[t] = parse_number(row[m_gdp1], file_row, schema.gdp_fy1);
    if (m_gdp2 >= 0) data.gdp_fy2[t] = parse_number(row[m_gdp2], file_row, schema.gdp_fy2);
  }
  for (size_t t = 0; t < data.dates.size(); ++t)
    if (std::isnan(data.spx[t]) || std::isnan(data.ust10y[t]) || std::isnan(data.gdp_fy1[t]))
      raise(errc::unbalanced_panel, "macro file missing date " + data.dates[t]);

  data.validate();
  return data;
}

PanelDataset load_panel_files(const std::string& firm_path, const std::string& macro_path,
                              const PanelSchema& schema) {
  std::ifstream firms(firm_path);
  if (!firms) raise(errc::io_failure, "cannot open '" + firm_path + "'");
  std::ifstream macro(macro_path);
  if (!macro) raise(errc::io_failure, "cannot open '" + macro_path + "'");
  return load_panel(firms, macro, schema);
}

std::string render_panel_csv(const PanelDataset& data) {
  std::string out = "date,ticker,adj_close,turnover,eps_fy1";
  if (data.has_eps_fy2()) out += ",eps_fy2";
  if (data.has_mktcap()) out += ",mktcap";
  out += "\n";
  for (int i = 0; i < data.n_firms(); ++i) {
    for (int t = 0; t < data.n_days(); ++t) {
      const size_t k = data.idx(i, t);
      out += data.dates[t];
      out += ',';
      out += data.firms[i];
      out += ',';
      out += format_double(data.close[k]);
      out += ',';
      out += format_double(data.turnover[k]);
      out += ',';
      out += format_double(data.eps_fy1[k]);
      if (data.has_eps_fy2()) {
        out += ',';
        out += format_double(data.eps_fy2[k]);
      }
      if (data.has_mktcap()) {
        out += ',';
        out += format_double(data.mktcap[k]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string render_macro_csv(const PanelDataset& data) {
  std::string out = "date,spx,ust10y,gdp_fy1";
  if (data.has_gdp_fy2()) out += ",gdp_fy2";
  out += "\n";
  for (int t = 0; t < data.n_days(); ++t) {
    out += data.dates[t];
    out += ',';
    out += format_double(data.spx[t]);
    out += ',';
    out += format_double(data.ust10y[t]);
    out += ',';
    out += format_double(data.gdp_fy1[t]);
    if (data.has_gdp_fy2()) {
      out += ',';
      out += format_double(data.gdp_fy2[t]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> compute_returns(const PanelDataset& data) {
  if (data.n_days() < 2)
    raise(errc::insufficient_history, "returns need at least 2 dates");
  std::vector<double> returns(data.size(), kNaN);
  for (int i = 0; i < data.n_firms(); ++i) {
    for (int t = 1; t < data.n_days(); ++t) {
      const size_t k = data.idx(i, t);
      returns[k] = rel_change(data.close[k], data.close[k - 1]);
    }
  }
  return returns;
}

RelativeChanges compute_relative_changes(const PanelDataset& data) {
  RelativeChanges rc;
  rc.stock_return = compute_returns(data);
  rc.eps_change.assign(data.size(), kNaN);
  for (int i = 0; i < data.n_firms(); ++i) {
    for (int t = 1; t < data.n_days(); ++t) {
      const size_t k = data.idx(i, t);
      rc.eps_change[k] = rel_change(data.eps_fy1[k], data.eps_fy1[k - 1]);
    }
  }
  const int T = data.n_days();
  rc.mkt_return.assign(T, kNaN);
  rc.int_change.assign(T, kNaN);
  rc.gdp_change.assign(T, kNaN);
  for (int t = 1; t < T; ++t) {
    rc.mkt_return[t] = rel_change(data.spx[t], data.spx[t - 1]);
    rc.int_change[t] = rel_change(data.ust10y[t], data.ust10y[t - 1]);
    rc.gdp_change[t] = rel_change(data.gdp_fy1[t], data.gdp_fy1[t - 1]);
  }
  return rc;
}

namespace {

SummaryRow distribution_row(const std::string& name, std::vector<double> per_firm_means) {
  std::sort(per_firm_means.begin(), per_firm_means.end());
  SummaryRow row;
  row.name = name;
  row.mean = mean(per_firm_means);
  row.min = per_firm_means.front();
  row.q1 = quantile_sorted(per_firm_means, 0.25);
  row.median = quantile_sorted(per_firm_means, 0.50);
  row.q3 = quantile_sorted(per_firm_means, 0.75);
  row.max = per_firm_means.back();
  return row;
}

}  // namespace

const SummaryRow& PanelSummary::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  raise(errc::missing_column, "summary row '" + name + "' not available");
}

PanelSummary summarize(const PanelDataset& data) {
  data.validate();
  const int n = data.n_firms();
  const int T = data.n_days();
  std::vector<double> dollar(n), shares(n), caps;
  if (data.has_mktcap()) caps.resize(n);
  for (int i = 0; i < n; ++i) {
    double turn_acc = 0.0, share_acc = 0.0, cap_acc = 0.0;
    for (int t = 0; t < T; ++t) {
      const size_t k = data.idx(i, t);
      turn_acc += data.turnover[k];
      share_acc += data.turnover[k] / data.close[k];
      if (data.has_mktcap()) cap_acc += data.mktcap[k];
    }
    dollar[i] = turn_acc / T;
    shares[i] = share_acc / T;
    if (data.has_mktcap()) caps[i] = cap_acc / T;
  }
  PanelSummary summary;
  summary.rows.push_back(distribution_row("mean_dollar_volume", std::move(dollar)));
  summary.rows.push_back(distribution_row("mean_share_volume", std::move(shares)));
  if (data.has_mktcap())
    summary.rows.push_back(distribution_row("mean_market_cap", std::move(caps)));
  return summary;
}

std::string render_summary_csv(const PanelSummary& summary) {
  std::string out = "statistic,mean,min,q1,median,q3,max\n";
  for (const auto& r : summary.rows) {
    out += r.name;
    out += ',';
    out += format_double(r.mean);
    out += ',';
    out += format_double(r.min);
    out += ',';
    out += format_double(r.q1);
    out += ',';
    out += format_double(r.median);
    out += ',';
    out += format_double(r.q3);
    out += ',';
    out += format_double(r.max);
    out += '\n';
  }
  return out;
}

}  // namespace paneldyn
