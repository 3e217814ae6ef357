#include "sparsevar/app/experiment.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/app/fit_io.hpp"
#include "sparsevar/app/forecast.hpp"
#include "sparsevar/errors.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar::app {

using nlohmann::json;

Design two_block_design() {
  Matrix b1 = Matrix::Zero(5, 5), b2 = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    b1(i, i) = b1(i, 0) = 0.4;
    b2(i, i) = b2(i, 0) = 0.2;
  }
  Design d;
  d.coefficients = VarCoefficients::zeros(10, 2);
  d.coefficients.lags[0].topLeftCorner(5, 5) = b1;
  d.coefficients.lags[0].bottomRightCorner(5, 5) = b1;
  d.coefficients.lags[1].topLeftCorner(5, 5) = b2;
  d.coefficients.lags[1].bottomRightCorner(5, 5) = b2;
  d.error = ErrorModel::from_sigma(0.1 * Matrix::Identity(10, 10));
  return d;
}

namespace {

class Reader {
 public:
  Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_ + ": " + message); }

  bool has(const char* key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  std::string child(const char* key) const { return path_ + "." + key; }

  const json& at(const char* key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  int integer(const char* key, int fallback, int minimum) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < minimum)
      throw ConfigError(fmt::format("{}: expected an integer >= {}", child(key), minimum));
    return v.get<int>();
  }

  double number(const char* key, double fallback, bool positive = true) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number() || (positive && !(v.get<double>() > 0.0)))
      throw ConfigError(child(key) + (positive ? ": expected a positive number" : ": expected a number"));
    return v.get<double>();
  }

  std::string text(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError(child(key) + ": expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(child(it.key().c_str()) + ": unknown key");
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

Design parse_design(const json& doc, const std::string& path) {
  Reader r(doc, path);
  if (!r.has("lags")) r.fail("missing key 'lags'");
  if (!r.has("sigma")) r.fail("missing key 'sigma'");
  const json& lags = r.at("lags");
  if (!lags.is_array() || lags.empty()) throw ConfigError(path + ".lags: expected a non-empty array of matrices");
  Design d;
  try {
    for (std::size_t l = 0; l < lags.size(); ++l)
      d.coefficients.lags.push_back(matrix_from_json(lags[l], path + ".lags[" + std::to_string(l) + "]"));
    d.coefficients.validate();
    const Matrix sigma = matrix_from_json(r.at("sigma"), path + ".sigma");
    if (sigma.rows() != d.coefficients.q() || sigma.cols() != d.coefficients.q())
      throw ConfigError(path + ".sigma: must be q x q with q = " + std::to_string(d.coefficients.q()));
    d.error = ErrorModel::from_sigma(sigma);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!is_stable(d.coefficients)) throw ConfigError(path + ".lags: the VAR is not stable");
  r.finish();
  return d;
}

}  // namespace

ExperimentConfig parse_experiment(const json& doc) {
  ExperimentConfig c;
  Reader r(doc, "config");
  if (r.has("design")) {
    const json& d = r.at("design");
    if (d.is_string()) {
      if (d.get<std::string>() != "two_block") throw ConfigError("config.design: expected \"two_block\" or an object");
    } else {
      c.design = parse_design(d, "config.design");
      c.design_name = "custom";
    }
  }
  c.length = r.integer("T", c.length, 3);
  c.burn_in = r.integer("burn_in", c.burn_in, 0);
  c.replicates = r.integer("replicates", c.replicates, 1);
  if (r.has("seed")) {
    const json& s = r.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("config.seed: expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.lags = r.integer("lags", c.lags, 1);
  if (r.has("methods")) {
    const json& m = r.at("methods");
    if (!m.is_array() || m.empty()) throw ConfigError("config.methods: expected a non-empty array of method names");
    c.methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string where = "config.methods[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw ConfigError(where + ": expected a string");
      try {
        check_method(m[i].get<std::string>());
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
      c.methods.push_back(m[i].get<std::string>());
    }
  }
  if (r.has("forecast")) {
    Reader f(r.at("forecast"), "config.forecast");
    ForecastSettings s;
    s.end = f.integer("T", s.end, 2);
    s.window = f.integer("S", s.window, 1);
    if (s.window >= s.end) throw ConfigError("config.forecast.S: must be smaller than config.forecast.T");
    f.finish();
    c.forecast = s;
  }
  if (r.has("irf")) {
    Reader i(r.at("irf"), "config.irf");
    c.irf_horizon = i.integer("horizon", 10, 0);
    i.finish();
  }
  c.output_dir = r.text("output_dir", "");
  if (r.has("sparse")) {
    Reader s(r.at("sparse"), "config.sparse");
    auto& f = c.options.sparse;
    f.lambda1_grid_size = s.integer("lambda1_grid_size", f.lambda1_grid_size, 1);
    f.lambda2_grid_size = s.integer("lambda2_grid_size", f.lambda2_grid_size, 1);
    f.lambda1_grid_ratio = s.number("lambda1_grid_ratio", f.lambda1_grid_ratio);
    f.lambda2_grid_ratio = s.number("lambda2_grid_ratio", f.lambda2_grid_ratio);
    f.outer_tol = s.number("outer_tol", f.outer_tol);
    f.outer_max_iter = s.integer("outer_max_iter", f.outer_max_iter, 1);
    f.selection_iterations = s.integer("selection_iterations", f.selection_iterations, 1);
    const std::string penalty = s.text("group_penalty", "standardized");
    if (penalty == "standardized")
      f.group_penalty = grouplasso::GroupPenalty::standardized;
    else if (penalty == "unweighted")
      f.group_penalty = grouplasso::GroupPenalty::unweighted;
    else
      throw ConfigError("config.sparse.group_penalty: expected \"standardized\" or \"unweighted\"");
    const std::string criterion = s.text("criterion", "bic");
    if (criterion == "bic")
      f.criterion = estimator::Criterion::bic;
    else if (criterion == "aic")
      f.criterion = estimator::Criterion::aic;
    else
      throw ConfigError("config.sparse.criterion: expected \"bic\" or \"aic\"");
    s.finish();
    try {
      f.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config.sparse: ") + e.what());
    }
  }
  if (r.has("minnesota")) {
    Reader m(r.at("minnesota"), "config.minnesota");
    c.options.minnesota.tightness = m.number("tightness", c.options.minnesota.tightness);
    c.options.minnesota.cross_weight = m.number("cross_weight", c.options.minnesota.cross_weight);
    m.finish();
  }
  if (r.has("niw")) {
    Reader n(r.at("niw"), "config.niw");
    c.options.niw.tightness = n.number("tightness", c.options.niw.tightness);
    n.finish();
  }
  r.finish();
  if (c.lags >= c.length) throw ConfigError("config.lags: must be smaller than config.T");
  if (c.forecast && c.lags >= c.forecast->window) throw ConfigError("config.lags: must be smaller than config.forecast.S");
  return c;
}

ExperimentConfig read_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_experiment(doc);
}

namespace {

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + config.output_dir + "': " + ec.message());
  const fs::path dir(config.output_dir);

  std::ostringstream metrics;
  result.report.write_csv(metrics);
  write_file((dir / "metrics.csv").string(), metrics.str());

  std::ostringstream pvalues;
  result.report.write_tests_csv(pvalues);
  write_file((dir / "pvalues.csv").string(), pvalues.str());

  std::string table = fmt::format("Design: {}, N_s = {}, T = {}, q = {}, p = {}\n", config.design_name,
                                  config.replicates, config.length, config.design.coefficients.q(), config.lags);
  if (config.forecast)
    table += fmt::format("Forecast: rolling window S = {}, T = {}\n", config.forecast->window, config.forecast->end);
  table += "\n" + result.report.table();
  write_file((dir / "table.txt").string(), table);

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    std::ostringstream out;
    out << "replicate,seed,p,lambda1,lambda2,nonzeros,maee,tpr,tnr,mafe,forecast_failures\n";
    for (const auto& rec : result.records[m]) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", rec.replicate, rec.seed, rec.fit.p, rec.fit.lambda1,
                         rec.fit.lambda2, rec.fit.coefficients.nonzeros(), rec.maee, rec.tpr, rec.tnr,
                         config.forecast ? format_number(rec.mafe) : std::string(), rec.forecast_failures);
    }
    write_file((dir / ("fits_" + config.methods[m] + ".csv")).string(), out.str());
  }

  if (config.irf_horizon) {
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const FitResult& fit = result.records[m].front().fit;
      std::ostringstream out;
      irf::write_csv(out, irf::girf_all(fit, *config.irf_horizon), fit.names);
      write_file((dir / ("girf_" + config.methods[m] + ".csv")).string(), out.str());
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Design& design = config.design;
  const int total_length = config.forecast ? std::max(config.length, config.forecast->end) : config.length;
  const std::size_t methods = config.methods.size();
  const auto replicates = static_cast<std::size_t>(config.replicates);

  ExperimentResult result;
  result.records.assign(methods, std::vector<ReplicateRecord>(replicates));
  parallel_for(replicates, [&](std::size_t r) {
    const std::uint64_t seed = Rng::stream(config.seed, r).next_u64();
    const TimeSeriesPanel series = simulate_var(design.coefficients, design.error, total_length, seed, config.burn_in);
    const TimeSeriesPanel estimation = series.slice(0, config.length);
    for (std::size_t m = 0; m < methods; ++m) {
      const std::string& method = config.methods[m];
      ReplicateRecord& rec = result.records[m][r];
      rec.replicate = static_cast<int>(r);
      rec.seed = seed;
      try {
        rec.fit = fit_method(method, estimation, config.lags, config.options);
      } catch (const Error& e) {
        throw NumericalError(fmt::format("replicate {}, method {}: {}", r, method, e.what()));
      }
      if (rec.fit.p == design.coefficients.p()) {
        rec.maee = eval::maee(rec.fit.coefficients, design.coefficients);
        rec.tpr = eval::tpr(rec.fit.coefficients, design.coefficients);
        rec.tnr = eval::tnr(rec.fit.coefficients, design.coefficients);
      } else {
        rec.maee = rec.tpr = rec.tnr = NAN;
      }
      if (config.forecast) {
        const Fitter fitter = [&](const TimeSeriesPanel& train) {
          return fit_method(method, train, config.lags, config.options);
        };
        const ForecastResult fc =
            rolling_forecast(series.slice(0, config.forecast->end), fitter, config.forecast->window, config.forecast->end);
        rec.forecast_failures = static_cast<int>(fc.failures.size());
        rec.origins = fc.origins;
        rec.origin_errors = fc.row_errors();
        rec.mafe = fc.origins.empty() ? NAN : eval::mafe(fc.forecasts, fc.actuals);
      }
    }
  });

  for (std::size_t m = 0; m < methods; ++m) {
    eval::MethodMetrics metrics;
    metrics.method = config.methods[m];
    for (const auto& rec : result.records[m]) {
      if (std::isfinite(rec.maee)) {
        metrics.maee.push_back(rec.maee);
        metrics.tpr.push_back(rec.tpr);
        metrics.tnr.push_back(rec.tnr);
      }
      if (config.forecast && std::isfinite(rec.mafe)) metrics.mafe.push_back(rec.mafe);
    }
    result.report.methods.push_back(std::move(metrics));
  }
  result.report.add_paired_tests();

  // Diebold-Mariano on per-origin errors pooled over replicates, matched by
  // origin within each replicate.
  if (config.forecast) {
    for (std::size_t a = 0; a < methods; ++a) {
      for (std::size_t b = a + 1; b < methods; ++b) {
        std::vector<double> d;
        for (std::size_t r = 0; r < replicates; ++r) {
          const auto& ra = result.records[a][r];
          const auto& rb = result.records[b][r];
          std::size_t j = 0;
          for (std::size_t i = 0; i < ra.origins.size(); ++i) {
            while (j < rb.origins.size() && rb.origins[j] < ra.origins[i]) ++j;
            if (j < rb.origins.size() && rb.origins[j] == ra.origins[i])
              d.push_back(ra.origin_errors[i] - rb.origin_errors[j]);
          }
        }
        if (d.size() < 10) continue;
        result.report.tests.push_back(
            {"mafe", config.methods[a], config.methods[b], "diebold_mariano", eval::diebold_mariano_differential(d, 1)});
      }
    }
  }

  if (!config.output_dir.empty()) write_outputs(config, result);
  return result;
}

}  // namespace sparsevar::app
