#pragma once

#include <istream>
#include <string>
#include <vector>

namespace paneldyn {

/// Minimal delimited-text table: a header row plus string cells.
/// Quoting is not supported; the file formats used here never need it.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for `name`, or -1 when absent.
  int column(const std::string& name) const;
  /// Same, raising MissingColumn.
  int require(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Parse a numeric cell; ParseFailure carries the 1-based file row number.
double parse_number(const std::string& cell, size_t file_row, const std::string& column);

/// Shortest decimal form that round-trips the exact double.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace paneldyn
