#include "paneldyn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "paneldyn/errors.hpp"

namespace paneldyn {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  return -1;
}

int CsvTable::require(const std::string& name) const {
  const int j = column(name);
  if (j < 0) raise(errc::missing_column, "required column '" + name + "' not found");
  return j;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (row_no == 1) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      raise(errc::parse_failure,
            "row " + std::to_string(row_no) + ": expected " +
                std::to_string(table.header.size()) + " cells, got " +
                std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty())
    raise(errc::parse_failure, "empty input: missing header row");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open '" + path + "'");
  return read_csv(in);
}

double parse_number(const std::string& cell, size_t file_row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    raise(errc::parse_failure, "row " + std::to_string(file_row) + ": column '" +
                                   column + "' has non-numeric value '" + cell + "'");
  return value;
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io_failure, "cannot write '" + path + "'");
  out << contents;
  if (!out) raise(errc::io_failure, "short write on '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_failure, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace paneldyn
