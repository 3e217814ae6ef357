#include "sparsevar/app/transform.hpp"

#include <fmt/format.h>

#include <cmath>

#include "sparsevar/errors.hpp"

namespace sparsevar::app {

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::log_diff:
      return "log-diff";
    case Rule::diff:
      return "diff";
    case Rule::none:
      return "none";
  }
  return "none";
}

Rule parse_rule(const std::string& text) {
  if (text == "log-diff") return Rule::log_diff;
  if (text == "diff") return Rule::diff;
  if (text == "none") return Rule::none;
  throw ConfigError("unknown transform '" + text + "' (expected log-diff|diff|none)");
}

TransformPlan TransformPlan::defaults_for(const std::vector<std::string>& names) {
  auto ends_with = [](const std::string& s, const std::string& tail) {
    return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
  };
  TransformPlan plan;
  for (const auto& name : names) {
    if (ends_with(name, "__sales") || ends_with(name, "__price"))
      plan.rules.push_back(Rule::log_diff);
    else if (ends_with(name, "__promo"))
      plan.rules.push_back(Rule::diff);
    else
      plan.rules.push_back(Rule::none);
  }
  return plan;
}

namespace {

void check_plan(const TransformPlan& plan, Eigen::Index series) {
  if (static_cast<Eigen::Index>(plan.rules.size()) != series) {
    throw DimensionError(fmt::format("transform plan has {} rules for {} series", plan.rules.size(), series));
  }
}

}  // namespace

TimeSeriesPanel transform(const TimeSeriesPanel& panel, const TransformPlan& plan) {
  check_plan(plan, panel.series());
  if (panel.length() < 2) throw DimensionError("transform needs at least two observations");
  const int rows = panel.length() - 1;
  Matrix out(rows, panel.series());
  for (int k = 0; k < panel.series(); ++k) {
    const Rule rule = plan.rules[static_cast<std::size_t>(k)];
    if (rule == Rule::log_diff) {
      for (int t = 0; t <= rows; ++t) {
        if (!(panel.data(t, k) > 0.0)) {
          throw DataError(fmt::format("log transform of nonpositive value {} in series '{}' at row {}",
                                      panel.data(t, k), panel.names[static_cast<std::size_t>(k)], t + 1));
        }
      }
    }
    for (int t = 0; t < rows; ++t) {
      const double prev = panel.data(t, k);
      const double cur = panel.data(t + 1, k);
      switch (rule) {
        case Rule::log_diff:
          out(t, k) = std::log(cur) - std::log(prev);
          break;
        case Rule::diff:
          out(t, k) = cur - prev;
          break;
        case Rule::none:
          out(t, k) = cur;
          break;
      }
    }
  }
  return TimeSeriesPanel(std::move(out), panel.names);
}

Vector invert_transform(const Vector& change, const Vector& last_level, const TransformPlan& plan) {
  check_plan(plan, change.size());
  if (last_level.size() != change.size()) throw DimensionError("level and change vectors differ in length");
  Vector out(change.size());
  for (Eigen::Index k = 0; k < change.size(); ++k) {
    switch (plan.rules[static_cast<std::size_t>(k)]) {
      case Rule::log_diff:
        if (!(last_level(k) > 0.0)) throw DataError("cannot invert a log transform from a nonpositive level");
        out(k) = std::exp(std::log(last_level(k)) + change(k));
        break;
      case Rule::diff:
        out(k) = last_level(k) + change(k);
        break;
      case Rule::none:
        out(k) = change(k);
        break;
    }
  }
  return out;
}

Matrix invert_panel(const Matrix& changes, const Vector& first_level, const TransformPlan& plan) {
  Matrix out(changes.rows() + 1, changes.cols());
  out.row(0) = first_level.transpose();
  for (Eigen::Index t = 0; t < changes.rows(); ++t)
    out.row(t + 1) = invert_transform(changes.row(t).transpose(), out.row(t).transpose(), plan).transpose();
  return out;
}

}  // namespace sparsevar::app
