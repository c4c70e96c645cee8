#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

namespace paneldyn {

/// Column-name map for the two input files. Defaults match the canonical
/// schemas; override to ingest files with different headers.
struct PanelSchema {
  std::string date = "date";
  std::string ticker = "ticker";
  std::string adj_close = "adj_close";
  std::string turnover = "turnover";
  std::string eps_fy1 = "eps_fy1";
  std::string eps_fy2 = "eps_fy2";
  std::string mktcap = "mktcap";

  std::string macro_date = "date";
  std::string spx = "spx";
  std::string ust10y = "ust10y";
  std::string gdp_fy1 = "gdp_fy1";
  std::string gdp_fy2 = "gdp_fy2";
};

/// Balanced firm-by-day panel. Firms are sorted lexicographically and dates
/// ascending; per-firm series are stored firm-major (row = firm * n_days + day).
/// Immutable after load; concurrent reads are safe.
class PanelDataset {
 public:
  std::vector<std::string> firms;
  std::vector<std::string> dates;

  // firm-major, size n_firms() * n_days()
  std::vector<double> close;
  std::vector<double> turnover;
  std::vector<double> eps_fy1;
  std::vector<double> eps_fy2;  // empty when the column was absent
  std::vector<double> mktcap;   // empty when the column was absent

  // per-date macro series, size n_days()
  std::vector<double> spx;
  std::vector<double> ust10y;
  std::vector<double> gdp_fy1;
  std::vector<double> gdp_fy2;  // empty when the column was absent

  int n_firms() const { return static_cast<int>(firms.size()); }
  int n_days() const { return static_cast<int>(dates.size()); }
  size_t size() const { return firms.size() * dates.size(); }
  size_t idx(int firm, int day) const {
    return static_cast<size_t>(firm) * dates.size() + static_cast<size_t>(day);
  }
  bool has_eps_fy2() const { return !eps_fy2.empty(); }
  bool has_mktcap() const { return !mktcap.empty(); }
  bool has_gdp_fy2() const { return !gdp_fy2.empty(); }

  std::span<const double> firm_series(std::span<const double> col, int firm) const {
    return col.subspan(static_cast<size_t>(firm) * dates.size(), dates.size());
  }

  /// Re-checks every dataset invariant; load_panel calls this before returning.
  void validate() const;

  /// Copy of the panel cut to the first `n_days` dates (look-ahead probes).
  PanelDataset truncated(int n_days) const;
};

PanelDataset load_panel(std::istream& firm_csv, std::istream& macro_csv,
                        const PanelSchema& schema = {});
PanelDataset load_panel_files(const std::string& firm_path, const std::string& macro_path,
                              const PanelSchema& schema = {});

/// Canonical writers; load_panel of the emitted text reproduces the dataset
/// exactly (values are printed in shortest round-trip form).
std::string render_panel_csv(const PanelDataset& data);
std::string render_macro_csv(const PanelDataset& data);

/// Day-over-day relative changes. Index 0 of every series is NaN: a change
/// needs a prior value.
struct RelativeChanges {
  std::vector<double> stock_return;  // firm-major
  std::vector<double> eps_change;    // firm-major
  std::vector<double> mkt_return;    // per date
  std::vector<double> int_change;    // per date
  std::vector<double> gdp_change;    // per date
};

/// Next-day return series R_t = (P_t - P_{t-1}) / P_{t-1}, firm-major,
/// NaN at each firm's first date.
std::vector<double> compute_returns(const PanelDataset& data);

RelativeChanges compute_relative_changes(const PanelDataset& data);

struct SummaryRow {
  std::string name;
  double mean = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Cross-firm distribution of per-firm means: dollar volume, share volume,
/// and market cap when the input carried it.
struct PanelSummary {
  std::vector<SummaryRow> rows;
  const SummaryRow& row(const std::string& name) const;  // MissingColumn
};

PanelSummary summarize(const PanelDataset& data);
std::string render_summary_csv(const PanelSummary& summary);

}  // namespace paneldyn
