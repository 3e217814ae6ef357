#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsevar/app/methods.hpp"
#include "sparsevar/eval.hpp"

namespace sparsevar::app {

struct Design {
  VarCoefficients coefficients;
  ErrorModel error;
};

// Two 5-series blocks; inside each block every series loads on its own lags
// and on the first series of the block, with 0.4 at lag 1 and 0.2 at lag 2.
// Sigma = 0.1 I. q = 10, p = 2, 36 nonzero coefficients.
Design two_block_design();

struct ForecastSettings {
  int end = 60;
  int window = 50;
};

struct ExperimentConfig {
  Design design = two_block_design();
  std::string design_name = "two_block";
  int length = 50;
  int burn_in = 200;
  int replicates = 100;
  std::uint64_t seed = 1;
  int lags = 2;
  std::vector<std::string> methods = method_names();
  std::optional<ForecastSettings> forecast;
  std::optional<int> irf_horizon;
  std::string output_dir;
  MethodOptions options;
};

// Validates every key; errors are ConfigError messages prefixed with the
// JSON path of the offending value, e.g. "config.forecast.window: ...".
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig read_experiment(const std::string& path);

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  FitResult fit;
  double maee = 0.0, tpr = 0.0, tnr = 0.0;
  double mafe = 0.0;
  int forecast_failures = 0;
  // Per-origin mean absolute forecast errors, keyed by origin.
  std::vector<int> origins;
  std::vector<double> origin_errors;
};

struct ExperimentResult {
  eval::MetricReport report;
  // records[m][r] for methods[m] and replicate r.
  std::vector<std::vector<ReplicateRecord>> records;
};

// Simulates, fits every method, scores and, when output_dir is set, writes
// metrics.csv, table.txt, pvalues.csv, fits_<method>.csv and (with an IRF
// horizon) girf_<method>.csv. Replicate r uses Rng::stream(seed, r).
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace sparsevar::app
