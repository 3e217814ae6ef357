#pragma once

#include <string>
#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar::app {

enum class Rule { log_diff, diff, none };

const char* rule_name(Rule rule);
Rule parse_rule(const std::string& text);

struct TransformPlan {
  std::vector<Rule> rules;

  // Sales and prices log-differenced, promotions differenced, anything else
  // left as is, chosen by the "__<channel>" suffix of each name.
  static TransformPlan defaults_for(const std::vector<std::string>& names);
};

// Output row t is the transform of input rows t and t+1, so the length
// shrinks by one. Throws DataError naming the cell when a log rule meets a
// nonpositive value.
TimeSeriesPanel transform(const TimeSeriesPanel& panel, const TransformPlan& plan);

// Level implied by a transformed value and the previous level:
// exp(log last + d) for log_diff, last + d for diff, d for none.
Vector invert_transform(const Vector& change, const Vector& last_level, const TransformPlan& plan);

// Rebuilds the level series from transformed rows and the first level row.
Matrix invert_panel(const Matrix& changes, const Vector& first_level, const TransformPlan& plan);

}  // namespace sparsevar::app
