#include "sparsevar/app/methods.hpp"

#include <algorithm>

#include "sparsevar/errors.hpp"

namespace sparsevar::app {

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"sparse", "ls", "rls1", "rlsit", "minnesota", "niw"};
  return names;
}

void check_method(const std::string& method) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), method) != names.end()) return;
  std::string choices;
  for (const auto& n : names) choices += (choices.empty() ? "" : "|") + n;
  throw ConfigError("unknown method '" + method + "' (expected " + choices + ")");
}

namespace {

FitResult dispatch(const std::string& method, const TimeSeriesPanel& panel, int lags, const MethodOptions& options) {
  if (method == "sparse") {
    if (lags == 0) return estimator::select_p(panel, options.sparse);
    return estimator::select_lambdas(panel, lags, options.sparse).fit;
  }
  if (lags < 1) throw ConfigError("method '" + method + "' needs an explicit lag order");
  if (method == "ls") return benchmarks::ls_fit(panel, lags);
  if (method == "rls1") return benchmarks::restricted_ls_1step(panel, lags);
  if (method == "rlsit") return benchmarks::restricted_ls_iterative(panel, lags);
  if (method == "minnesota") return benchmarks::minnesota_fit(panel, lags, options.minnesota);
  if (method == "niw") return benchmarks::niw_fit(panel, lags, options.niw);
  check_method(method);
  return {};
}

}  // namespace

FitResult fit_method(const std::string& method, const TimeSeriesPanel& panel, int lags, const MethodOptions& options) {
  check_method(method);
  if (lags < 0) throw ConfigError("lag order must be nonnegative");
  const TimeSeriesPanel centered = center(panel);
  FitResult fit = dispatch(method, centered, lags, options);
  fit.method = method;
  fit.names = centered.names;
  fit.means = centered.means;
  return fit;
}

irf::Refit fixed_tuning_refit(const FitResult& fit, const MethodOptions& options) {
  check_method(fit.method);
  return [fit, options](const TimeSeriesPanel& panel) {
    if (fit.method != "sparse") return fit_method(fit.method, panel, fit.p, options);
    FitResult out = estimator::alternate_fit(center(panel), fit.p, fit.lambda1, fit.lambda2, options.sparse);
    out.names = panel.names;
    return out;
  };
}

}  // namespace sparsevar::app
