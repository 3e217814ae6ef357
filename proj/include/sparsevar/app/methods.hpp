#pragma once

#include <string>
#include <vector>

#include "sparsevar/benchmarks.hpp"
#include "sparsevar/estimator.hpp"
#include "sparsevar/irf.hpp"

namespace sparsevar::app {

// Method names accepted on the command line and in configs.
const std::vector<std::string>& method_names();
// Throws ConfigError naming the valid choices.
void check_method(const std::string& method);

struct MethodOptions {
  estimator::FitConfig sparse;
  benchmarks::MinnesotaHyper minnesota;
  benchmarks::NiwHyper niw;
};

// Centers the panel and fits `method`. lags == 0 selects the lag order by
// the information criterion over options.sparse.p_candidates (sparse only).
FitResult fit_method(const std::string& method, const TimeSeriesPanel& panel, int lags,
                     const MethodOptions& options = {});

// Refits on a new panel with the method, lag order and penalty parameters of
// `fit` held fixed.
irf::Refit fixed_tuning_refit(const FitResult& fit, const MethodOptions& options = {});

}  // namespace sparsevar::app
