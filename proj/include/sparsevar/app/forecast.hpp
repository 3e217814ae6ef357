#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/app/transform.hpp"
#include "sparsevar/fit_result.hpp"

namespace sparsevar::app {

using Fitter = std::function<FitResult(const TimeSeriesPanel&)>;

// One-step forecast of the row following `history` (uncentered, oldest row
// first, at least p rows): means + sum_l B_l (y_{t-l} - means).
Vector forecast_next(const FitResult& fit, const Matrix& history);

struct ForecastFailure {
  int origin = 0;
  std::string message;
};

struct ForecastResult {
  std::vector<std::string> names;
  // Rows of forecasts and actuals, one per successful origin.
  std::vector<int> origins;
  Matrix forecasts;
  Matrix actuals;
  std::vector<ForecastFailure> failures;
  bool level_space = false;

  // Per-origin mean absolute error over series.
  std::vector<double> row_errors() const;
};

// For every origin o in [window, end): fit on rows [o - window, o) and
// forecast row o. Origins whose fit throws are recorded and skipped.
ForecastResult rolling_forecast(const TimeSeriesPanel& panel, const Fitter& fitter, int window, int end);

// Runs rolling_forecast on transform(levels, plan) and reports each forecast
// in level space through invert_transform from the last observed level.
// window and end index the transformed series.
ForecastResult rolling_forecast_levels(const TimeSeriesPanel& levels, const TransformPlan& plan, const Fitter& fitter,
                                       int window, int end);

// Long format: origin,series,forecast,actual.
void write_forecast_csv(std::ostream& out, const ForecastResult& result);

}  // namespace sparsevar::app
