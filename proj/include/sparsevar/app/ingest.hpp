#pragma once

#include <string>
#include <vector>

#include "sparsevar/app/csv.hpp"

namespace sparsevar::app {

enum class Channel { sales, price, promo };

const char* channel_name(Channel channel);
Channel parse_channel(const std::string& text);

// Split of a column name "<category>__<channel>".
struct VariableName {
  std::string category;
  Channel channel = Channel::sales;
};
VariableName parse_variable(const std::string& column);
std::string variable_name(const std::string& category, Channel channel);

// One store's weekly panel with columns ordered all sales, then all prices,
// then all promotions; categories keep their first-appearance order.
struct StorePanel {
  std::string store;
  std::vector<std::string> weeks;
  TimeSeriesPanel panel;
};

// Store CSV: a week label column followed by "<category>__<sales|price|promo>"
// columns. Throws DataError on duplicate weeks or columns, malformed names,
// missing or non-numeric cells, and gaps in integer week labels.
StorePanel ingest_store(const CsvTable& table, const std::string& store);
StorePanel ingest_store(const std::string& path);

// Ingests every path and checks that all stores share the same columns.
std::vector<StorePanel> ingest(const std::vector<std::string>& paths);

// Store id from a path: the file name without directory and extension.
std::string store_id(const std::string& path);

}  // namespace sparsevar::app
