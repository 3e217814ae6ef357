#include "sparsevar/app/ingest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <map>
#include <set>

#include "sparsevar/errors.hpp"

namespace sparsevar::app {

const char* channel_name(Channel channel) {
  switch (channel) {
    case Channel::sales:
      return "sales";
    case Channel::price:
      return "price";
    case Channel::promo:
      return "promo";
  }
  return "sales";
}

Channel parse_channel(const std::string& text) {
  if (text == "sales") return Channel::sales;
  if (text == "price") return Channel::price;
  if (text == "promo") return Channel::promo;
  throw ConfigError("unknown channel '" + text + "' (expected sales|price|promo)");
}

VariableName parse_variable(const std::string& column) {
  const auto split = column.rfind("__");
  if (split == std::string::npos || split == 0)
    throw DataError("column '" + column + "' is not of the form <category>__<sales|price|promo>");
  VariableName out;
  out.category = column.substr(0, split);
  const std::string kind = column.substr(split + 2);
  if (kind == "sales")
    out.channel = Channel::sales;
  else if (kind == "price")
    out.channel = Channel::price;
  else if (kind == "promo")
    out.channel = Channel::promo;
  else
    throw DataError("column '" + column + "' has unknown variable type '" + kind + "'");
  return out;
}

std::string variable_name(const std::string& category, Channel channel) {
  return category + "__" + channel_name(channel);
}

std::string store_id(const std::string& path) { return std::filesystem::path(path).stem().string(); }

namespace {

bool integer_label(const std::string& s, long long& value) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

StorePanel ingest_store(const CsvTable& table, const std::string& store) {
  if (table.header.size() < 2) throw DataError(table.source + ": need a week column and at least one variable");
  if (table.rows.empty()) throw DataError(table.source + ": no weeks");

  // Column order: channel first, then category first appearance.
  std::vector<std::string> categories;
  std::set<std::string> seen;
  std::vector<std::pair<VariableName, std::size_t>> columns;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (!seen.insert(table.header[c]).second)
      throw DataError(table.source + ": duplicate column '" + table.header[c] + "'");
    VariableName v = parse_variable(table.header[c]);
    if (std::find(categories.begin(), categories.end(), v.category) == categories.end())
      categories.push_back(v.category);
    columns.emplace_back(std::move(v), c);
  }
  auto rank = [&](const VariableName& v) {
    const auto cat = std::find(categories.begin(), categories.end(), v.category) - categories.begin();
    return std::make_pair(static_cast<int>(v.channel), cat);
  };
  std::stable_sort(columns.begin(), columns.end(),
                   [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });

  StorePanel out;
  out.store = store;
  std::map<std::string, int> week_line;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& week = table.rows[r][0];
    if (week.empty()) throw DataError(fmt::format("{}:{}: missing week label", table.source, table.lines[r]));
    const auto [it, inserted] = week_line.emplace(week, table.lines[r]);
    if (!inserted) {
      throw DataError(fmt::format("{}:{}: duplicate week '{}' (first seen on line {})", table.source, table.lines[r],
                                  week, it->second));
    }
    out.weeks.push_back(week);
  }
  long long previous = 0;
  bool numeric = true;
  for (std::size_t r = 0; r < out.weeks.size() && numeric; ++r) {
    long long value = 0;
    numeric = integer_label(out.weeks[r], value);
    if (numeric && r > 0 && value != previous + 1) {
      throw DataError(fmt::format("{}:{}: week '{}' does not follow week '{}'", table.source, table.lines[r],
                                  out.weeks[r], out.weeks[r - 1]));
    }
    previous = value;
  }

  Matrix data(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::size_t c = columns[j].second;
    names.push_back(table.header[c]);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = parse_number(table.rows[r][c], table, r, c);
  }
  out.panel = TimeSeriesPanel(std::move(data), std::move(names));
  return out;
}

StorePanel ingest_store(const std::string& path) { return ingest_store(read_csv(path), store_id(path)); }

std::vector<StorePanel> ingest(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("no store files given");
  std::vector<StorePanel> stores;
  for (const auto& path : paths) {
    stores.push_back(ingest_store(path));
    const auto& first = stores.front();
    const auto& last = stores.back();
    if (last.panel.names == first.panel.names) continue;
    const std::set<std::string> a(first.panel.names.begin(), first.panel.names.end());
    const std::set<std::string> b(last.panel.names.begin(), last.panel.names.end());
    for (const auto& name : a)
      if (!b.count(name))
        throw DataError("schema drift: store '" + last.store + "' lacks column '" + name + "' present in store '" +
                        first.store + "'");
    for (const auto& name : b)
      if (!a.count(name))
        throw DataError("schema drift: store '" + last.store + "' has extra column '" + name + "'");
    throw DataError("schema drift: store '" + last.store + "' orders its categories differently from store '" +
                    first.store + "'");
  }
  return stores;
}

}  // namespace sparsevar::app
