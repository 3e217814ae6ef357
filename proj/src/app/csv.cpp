#include "sparsevar/app/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparsevar/errors.hpp"

namespace sparsevar::app {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& source, int number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError(fmt::format("{}:{}: unterminated quoted field", source, number));
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  table.source = source;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_line(line, source, number);
    for (auto& f : fields) f = trim(f);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}", source, number, table.header.size(),
                                  fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(number);
  }
  if (table.header.empty()) throw DataError(source + ": file is empty");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, path);
}

double parse_number(const std::string& text, const CsvTable& table, std::size_t row, std::size_t column) {
  const auto where = [&] {
    return fmt::format("{}:{}: column '{}'", table.source, table.lines[row], table.header[column]);
  };
  if (text.empty()) throw DataError(where() + ": missing value");
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw DataError(where() + ": '" + text + "' is not a finite number");
  return value;
}

TimeSeriesPanel panel_from_table(const CsvTable& table) {
  if (table.header.size() < 2) throw DataError(table.source + ": need a time column and at least one series");
  if (table.rows.empty()) throw DataError(table.source + ": no data rows");
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  const auto cols = static_cast<Eigen::Index>(table.header.size() - 1);
  Matrix data(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto row = static_cast<std::size_t>(r);
      const auto column = static_cast<std::size_t>(c + 1);
      data(r, c) = parse_number(table.rows[row][column], table, row, column);
    }
  return TimeSeriesPanel(std::move(data), std::vector<std::string>(table.header.begin() + 1, table.header.end()));
}

TimeSeriesPanel read_panel(const std::string& path) { return panel_from_table(read_csv(path)); }

std::string format_number(double value) { return fmt::format("{}", value); }

void write_panel(std::ostream& out, const TimeSeriesPanel& panel) {
  out << 't';
  for (const auto& name : panel.names) out << ',' << name;
  out << '\n';
  for (int t = 0; t < panel.length(); ++t) {
    out << t + 1;
    for (int k = 0; k < panel.series(); ++k) out << ',' << format_number(panel.data(t, k));
    out << '\n';
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_panel(const std::string& path, const TimeSeriesPanel& panel) {
  std::ostringstream out;
  write_panel(out, panel);
  write_file(path, out.str());
}

}  // namespace sparsevar::app
