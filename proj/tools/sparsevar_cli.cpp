// sparsevar command line: simulate, fit, irf, forecast, network, bench.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/app/experiment.hpp"
#include "sparsevar/app/fit_io.hpp"
#include "sparsevar/app/forecast.hpp"
#include "sparsevar/app/ingest.hpp"
#include "sparsevar/app/methods.hpp"
#include "sparsevar/app/network.hpp"
#include "sparsevar/app/transform.hpp"
#include "sparsevar/errors.hpp"
#include "sparsevar/irf.hpp"

namespace fs = std::filesystem;
using namespace sparsevar;

namespace {

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-")
    std::cout << contents;
  else
    app::write_file(path, contents);
}

// Panel from either a generic CSV or a store CSV (transformed with the
// default plan). Keeps the store levels for level-space forecasts.
struct LoadedPanel {
  TimeSeriesPanel panel;
  TimeSeriesPanel levels;
  bool store = false;
};

LoadedPanel load_panel(const std::string& input, const std::string& store) {
  if (input.empty() == store.empty()) throw ConfigError("give exactly one of --input or --store");
  LoadedPanel out;
  if (!input.empty()) {
    out.panel = app::read_panel(input);
    return out;
  }
  const app::StorePanel sp = app::ingest_store(store);
  out.levels = sp.panel;
  out.panel = app::transform(sp.panel, app::TransformPlan::defaults_for(sp.panel.names));
  out.store = true;
  return out;
}

struct Common {
  std::uint64_t seed = 1;
  std::string config;
  int lags = 0;
  std::string method = "sparse";
  int horizon = 10;
  int boot = 0;
  std::string out;
};

int run(int argc, char** argv) {
  CLI::App cli{"Sparse VAR estimation, impulse responses, forecasting and category networks"};
  cli.require_subcommand(1);
  Common c;
  std::string input, store;

  auto* simulate = cli.add_subcommand("simulate", "Simulate a VAR panel to CSV");
  int length = 50, burn_in = 200;
  simulate->add_option("--config", c.config, "Experiment config whose design is simulated (default: two-block design)");
  simulate->add_option("--seed", c.seed, "Random seed");
  simulate->add_option("--length", length, "Number of observations")->check(CLI::PositiveNumber);
  simulate->add_option("--burn-in", burn_in, "Discarded initial observations")->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", c.out, "Output CSV (default stdout)");

  auto* fit = cli.add_subcommand("fit", "Estimate a VAR and write the fit as JSON");
  fit->add_option("--input", input, "Panel CSV: time column then one column per series");
  fit->add_option("--store", store, "Store CSV with <category>__<sales|price|promo> columns");
  fit->add_option("--method", c.method, "sparse|ls|rls1|rlsit|minnesota|niw");
  fit->add_option("--lags", c.lags, "Lag order; 0 selects it by BIC (sparse only)")->check(CLI::NonNegativeNumber);
  fit->add_option("--config", c.config, "Experiment config supplying estimator options");
  fit->add_option("--out", c.out, "Output JSON (default stdout)");

  auto* irf_cmd = cli.add_subcommand("irf", "Generalized impulse responses of a fitted VAR");
  std::string fit_path, effects_path;
  double level = 0.90;
  bool include_impact = false;
  irf_cmd->add_option("--fit", fit_path, "Fit JSON written by 'fit'")->required();
  irf_cmd->add_option("--input", input, "Panel the fit was estimated on (needed with --boot)");
  irf_cmd->add_option("--store", store, "Store CSV the fit was estimated on (needed with --boot)");
  irf_cmd->add_option("--horizon", c.horizon, "Largest horizon")->check(CLI::NonNegativeNumber);
  irf_cmd->add_option("--boot", c.boot, "Bootstrap replicates for bands (0 = none)")->check(CLI::NonNegativeNumber);
  irf_cmd->add_option("--level", level, "Band coverage")->check(CLI::Range(0.0, 1.0));
  irf_cmd->add_option("--seed", c.seed, "Bootstrap seed");
  irf_cmd->add_option("--config", c.config, "Experiment config supplying estimator options");
  irf_cmd->add_option("--effects", effects_path, "Also write effect sizes (sum of |response| over lags 1..10)");
  irf_cmd->add_flag("--include-impact", include_impact, "Include horizon 0 in effect sizes");
  irf_cmd->add_option("--out", c.out, "Output CSV (default stdout)");

  auto* forecast = cli.add_subcommand("forecast", "Rolling-window one-step forecasts");
  int window = 0, end = 0;
  forecast->add_option("--input", input, "Panel CSV");
  forecast->add_option("--store", store, "Store CSV; forecasts are reported in levels");
  forecast->add_option("--method", c.method, "sparse|ls|rls1|rlsit|minnesota|niw");
  forecast->add_option("--lags", c.lags, "Lag order; 0 selects it by BIC (sparse only)")->check(CLI::NonNegativeNumber);
  forecast->add_option("--window", window, "Rolling window length S")->required()->check(CLI::PositiveNumber);
  forecast->add_option("--end", end, "End T (default: all observations)")->check(CLI::NonNegativeNumber);
  forecast->add_option("--config", c.config, "Experiment config supplying estimator options");
  forecast->add_option("--out", c.out, "Output CSV (default stdout)");

  auto* network = cli.add_subcommand("network", "Majority-vote category network across stores");
  std::vector<std::string> stores;
  network->add_option("stores", stores, "Store CSV files")->required();
  network->add_option("--method", c.method, "sparse|ls|rls1|rlsit|minnesota|niw");
  network->add_option("--lags", c.lags, "Lag order; 0 selects it by BIC (sparse only)")->check(CLI::NonNegativeNumber);
  network->add_option("--config", c.config, "Experiment config supplying estimator options");
  network->add_option("--out", c.out, "Output directory")->required();

  auto* bench = cli.add_subcommand("bench", "Run a simulation experiment from a JSON config");
  int replicates = 0;
  bench->add_option("--config", c.config, "Experiment config")->required();
  bench->add_option("--seed", c.seed, "Override the config seed");
  bench->add_option("--replicates", replicates, "Override the replicate count")->check(CLI::PositiveNumber);
  bench->add_option("--out", c.out, "Override the output directory");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : 1;
  }

  app::check_method(c.method);
  app::ExperimentConfig config;
  if (!c.config.empty()) config = app::read_experiment(c.config);

  if (simulate->parsed()) {
    if (simulate->count("--length") == 0 && !c.config.empty()) length = config.length;
    if (simulate->count("--burn-in") == 0 && !c.config.empty()) burn_in = config.burn_in;
    const auto panel = simulate_var(config.design.coefficients, config.design.error, length, c.seed, burn_in);
    std::ostringstream out;
    app::write_panel(out, panel);
    emit(c.out, out.str());
    return 0;
  }

  if (fit->parsed()) {
    const auto loaded = load_panel(input, store);
    const FitResult result = app::fit_method(c.method, loaded.panel, c.lags, config.options);
    emit(c.out, app::to_json(result).dump(2) + "\n");
    return 0;
  }

  if (irf_cmd->parsed()) {
    const FitResult f = app::read_fit(fit_path);
    irf::GirfResult result;
    if (c.boot > 0) {
      const auto loaded = load_panel(input, store);
      irf::BootstrapOptions options;
      options.n_boot = c.boot;
      options.horizon = c.horizon;
      options.seed = c.seed;
      options.level = level;
      options.covariance = irf::CovarianceKind::diagonal;
      result = irf::bootstrap_bands(f, loaded.panel, app::fixed_tuning_refit(f, config.options), options);
      if (!result.warning.empty()) std::cerr << "warning: " << result.warning << "\n";
    } else {
      result = irf::girf_all(f, c.horizon);
    }
    std::ostringstream out;
    irf::write_csv(out, result, f.names);
    emit(c.out, out.str());
    if (!effects_path.empty()) {
      std::ostringstream eff;
      eff << "impulse,response,effect\n";
      const int q = f.coefficients.q();
      auto label = [&](int s) { return f.names.size() == static_cast<std::size_t>(q) ? f.names[s] : std::to_string(s); };
      for (int j = 0; j < q; ++j)
        for (int i = 0; i < q; ++i)
          eff << label(j) << ',' << label(i) << ','
              << app::format_number(irf::effect_size(result, j, i, 10, include_impact)) << '\n';
      emit(effects_path, eff.str());
    }
    return 0;
  }

  if (forecast->parsed()) {
    const auto loaded = load_panel(input, store);
    const int stop = end > 0 ? end : loaded.panel.length();
    const app::Fitter fitter = [&](const TimeSeriesPanel& train) {
      return app::fit_method(c.method, train, c.lags, config.options);
    };
    const app::ForecastResult result =
        loaded.store ? app::rolling_forecast_levels(loaded.levels, app::TransformPlan::defaults_for(loaded.levels.names),
                                                    fitter, window, stop)
                     : app::rolling_forecast(loaded.panel, fitter, window, stop);
    std::ostringstream out;
    app::write_forecast_csv(out, result);
    emit(c.out, out.str());
    for (const auto& f : result.failures) std::cerr << "origin " << f.origin << " skipped: " << f.message << "\n";
    if (!result.origins.empty())
      std::cerr << fmt::format("mafe={} origins={} failures={}\n", eval::mafe(result.forecasts, result.actuals),
                               result.origins.size(), result.failures.size());
    return 0;
  }

  if (network->parsed()) {
    const auto panels = app::ingest(stores);
    std::vector<FitResult> fits(panels.size());
    for (std::size_t s = 0; s < panels.size(); ++s) {
      const auto& sp = panels[s];
      const auto changes = app::transform(sp.panel, app::TransformPlan::defaults_for(sp.panel.names));
      fits[s] = app::fit_method(c.method, changes, c.lags, config.options);
    }
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw DataError("cannot create output directory '" + c.out + "': " + ec.message());
    std::vector<app::Network> nets;
    std::ostringstream prevalence, concordance;
    prevalence << "channel,within,cross\n";
    concordance << "channel,measure,w,chi_square,p_value,degenerate\n";
    for (auto channel : {app::Channel::price, app::Channel::promo, app::Channel::sales}) {
      nets.push_back(app::extract_network(fits, channel));
      const auto prev = app::prevalence(fits, channel);
      prevalence << fmt::format("{},{},{}\n", app::channel_name(channel), prev.within, prev.cross);
      if (fits.size() >= 2 && nets.back().categories.size() >= 3) {
        const auto w = app::degree_concordance(fits, channel);
        for (const auto& [name, r] : {std::pair{"influence", w.influence}, std::pair{"responsiveness", w.responsiveness}})
          concordance << fmt::format("{},{},{},{},{},{}\n", app::channel_name(channel), name, r.w, r.chi_square,
                                     r.p_value, r.degenerate ? 1 : 0);
      }
    }
    std::ostringstream edges, degrees, graphml, dot;
    app::write_edges_csv(edges, nets);
    app::write_degrees_csv(degrees, nets);
    app::write_graphml(graphml, nets);
    app::write_dot(dot, nets);
    const fs::path dir(c.out);
    app::write_file((dir / "edges.csv").string(), edges.str());
    app::write_file((dir / "degrees.csv").string(), degrees.str());
    app::write_file((dir / "network.graphml").string(), graphml.str());
    app::write_file((dir / "network.dot").string(), dot.str());
    app::write_file((dir / "prevalence.csv").string(), prevalence.str());
    app::write_file((dir / "concordance.csv").string(), concordance.str());
    for (const auto& net : nets) std::cout << app::channel_name(net.channel) << ": " << net.edges.size() << " edges\n";
    return 0;
  }

  if (bench->parsed()) {
    if (bench->count("--seed")) config.seed = c.seed;
    if (replicates > 0) config.replicates = replicates;
    if (!c.out.empty()) config.output_dir = c.out;
    const auto result = app::run_experiment(config);
    std::cout << result.report.table();
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
