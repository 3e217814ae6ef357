#include "sparsevar/app/forecast.hpp"

#include <fmt/format.h>

#include <ostream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/errors.hpp"
#include "sparsevar/parallel.hpp"

namespace sparsevar::app {

Vector forecast_next(const FitResult& fit, const Matrix& history) {
  const int p = fit.coefficients.p();
  const int q = fit.coefficients.q();
  if (history.cols() != q) throw DimensionError("history does not match the fitted dimension");
  if (history.rows() < p) throw DimensionError(fmt::format("forecast needs {} rows of history", p));
  const Vector means = fit.means.size() == q ? fit.means : Vector::Zero(q);
  Vector out = means;
  for (int l = 0; l < p; ++l) {
    const Vector lagged = history.row(history.rows() - 1 - l).transpose() - means;
    out.noalias() += fit.coefficients.lags[static_cast<std::size_t>(l)] * lagged;
  }
  return out;
}

std::vector<double> ForecastResult::row_errors() const {
  std::vector<double> out(static_cast<std::size_t>(forecasts.rows()));
  for (Eigen::Index r = 0; r < forecasts.rows(); ++r)
    out[static_cast<std::size_t>(r)] = (forecasts.row(r) - actuals.row(r)).cwiseAbs().mean();
  return out;
}

ForecastResult rolling_forecast(const TimeSeriesPanel& panel, const Fitter& fitter, int window, int end) {
  if (window < 1) throw ConfigError("rolling window must be positive");
  if (end > panel.length()) {
    throw ConfigError(fmt::format("forecast end {} exceeds the panel length {}", end, panel.length()));
  }
  if (window >= end) throw ConfigError(fmt::format("window {} must be smaller than the end {}", window, end));

  const int count = end - window;
  const int q = panel.series();
  struct Slot {
    bool ok = false;
    Vector forecast;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(count));
  parallel_for(slots.size(), [&](std::size_t i) {
    const int origin = window + static_cast<int>(i);
    Slot& slot = slots[i];
    try {
      const TimeSeriesPanel train = panel.slice(origin - window, window);
      const FitResult fit = fitter(train);
      slot.forecast = forecast_next(fit, train.data);
      slot.ok = slot.forecast.allFinite();
      if (!slot.ok) slot.error = "forecast is not finite";
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  ForecastResult out;
  out.names = panel.names;
  int kept = 0;
  for (const auto& s : slots) kept += s.ok ? 1 : 0;
  out.forecasts.resize(kept, q);
  out.actuals.resize(kept, q);
  int row = 0;
  for (int i = 0; i < count; ++i) {
    const int origin = window + i;
    const Slot& s = slots[static_cast<std::size_t>(i)];
    if (!s.ok) {
      out.failures.push_back({origin, s.error});
      continue;
    }
    out.origins.push_back(origin);
    out.forecasts.row(row) = s.forecast.transpose();
    out.actuals.row(row) = panel.data.row(origin);
    ++row;
  }
  return out;
}

ForecastResult rolling_forecast_levels(const TimeSeriesPanel& levels, const TransformPlan& plan, const Fitter& fitter,
                                       int window, int end) {
  const TimeSeriesPanel changes = transform(levels, plan);
  ForecastResult out = rolling_forecast(changes, fitter, window, end);
  for (std::size_t r = 0; r < out.origins.size(); ++r) {
    const int origin = out.origins[r];
    const auto row = static_cast<Eigen::Index>(r);
    // Change row o moves level row o to level row o + 1.
    out.forecasts.row(row) =
        invert_transform(out.forecasts.row(row).transpose(), levels.data.row(origin).transpose(), plan).transpose();
    out.actuals.row(row) = levels.data.row(origin + 1);
  }
  out.level_space = true;
  return out;
}

void write_forecast_csv(std::ostream& out, const ForecastResult& result) {
  out << "origin,series,forecast,actual\n";
  for (std::size_t r = 0; r < result.origins.size(); ++r) {
    for (std::size_t k = 0; k < result.names.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(r);
      const auto col = static_cast<Eigen::Index>(k);
      out << result.origins[r] << ',' << result.names[k] << ',' << format_number(result.forecasts(row, col)) << ','
          << format_number(result.actuals(row, col)) << '\n';
    }
  }
}

}  // namespace sparsevar::app
