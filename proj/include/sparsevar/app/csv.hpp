#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar::app {

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source.
  std::vector<int> lines;
};

// Comma separated, first line is the header. Fields may be double-quoted
// with "" as an escaped quote. Blank lines are skipped. Ragged rows throw
// DataError with the line number.
CsvTable parse_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);

// Parses a finite double or throws DataError naming the cell.
double parse_number(const std::string& text, const CsvTable& table, std::size_t row, std::size_t column);

// Generic panel file: the first column is a time label, every other column
// a numeric series named by its header.
TimeSeriesPanel read_panel(const std::string& path);
TimeSeriesPanel panel_from_table(const CsvTable& table);
// Writes "t,<names...>" with t = 1..T.
void write_panel(std::ostream& out, const TimeSeriesPanel& panel);
void write_panel(const std::string& path, const TimeSeriesPanel& panel);

// Shortest decimal that round-trips.
std::string format_number(double value);

// Opens a file for writing or throws DataError.
void write_file(const std::string& path, const std::string& contents);

}  // namespace sparsevar::app
