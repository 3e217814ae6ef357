#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/app/experiment.hpp"
#include "sparsevar/app/fit_io.hpp"
#include "sparsevar/app/forecast.hpp"
#include "sparsevar/app/ingest.hpp"
#include "sparsevar/app/methods.hpp"
#include "sparsevar/app/network.hpp"
#include "sparsevar/app/transform.hpp"
#include "sparsevar/benchmarks.hpp"
#include "sparsevar/errors.hpp"
#include "support.hpp"

using namespace sparsevar;
using namespace sparsevar::app;
namespace fs = std::filesystem;

namespace {

CsvTable table_of(const std::string& text, const std::string& source = "store.csv") {
  std::istringstream in(text);
  return parse_csv(in, source);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sparsevar_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Fit over categories {a, b} whose only active cross group is `source`
// channel of a into sales of b when `edge` is set.
FitResult store_fit(bool edge, Channel channel = Channel::price) {
  FitResult fit;
  fit.names = {"a__sales", "b__sales", "a__price", "b__price", "a__promo", "b__promo"};
  fit.coefficients = VarCoefficients::zeros(6, 2);
  for (int i = 0; i < 6; ++i) fit.coefficients.lags[0](i, i) = 0.3;
  const int predictor = channel == Channel::sales ? 0 : channel == Channel::price ? 2 : 4;
  if (edge) fit.coefficients.lags[1](1, predictor) = -0.2;
  fit.error = ErrorModel::from_sigma(Matrix::Identity(6, 6));
  fit.p = 2;
  return fit;
}

std::vector<FitResult> stores_with_support(int present, int total) {
  std::vector<FitResult> fits;
  for (int s = 0; s < total; ++s) fits.push_back(store_fit(s < present));
  return fits;
}

}  // namespace

TEST_SUITE("app") {
  TEST_CASE("csv parsing handles quotes and reports ragged rows") {
    const auto t = table_of("week,\"x,1\",y\n1,2,\"3\"\n\n2,4,5\n");
    CHECK(t.header == std::vector<std::string>{"week", "x,1", "y"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.lines[1] == 4);
    CHECK(parse_number(t.rows[0][2], t, 0, 2) == 3.0);
    CHECK(error_of([] { table_of("a,b\n1\n"); }).find("store.csv:2") != std::string::npos);
    const auto bad = table_of("a,b\n1,x\n");
    CHECK(error_of([&] { parse_number("x", bad, 0, 1); }).find("store.csv:2") != std::string::npos);
    CHECK(error_of([&] { parse_number("", bad, 0, 1); }).find("missing") != std::string::npos);
    CHECK_THROWS_AS(parse_number("inf", bad, 0, 1), DataError);
  }

  TEST_CASE("numbers print in shortest round-trip form") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
  }

  TEST_CASE("toy store becomes a 3 x 6 panel in block order") {
    const auto store = ingest_store(table_of("week,beer__price,beer__sales,chips__sales,beer__promo,chips__price,"
                                             "chips__promo\n"
                                             "1,2.0,10,20,0,1.5,1\n2,2.1,11,21,1,1.6,0\n3,2.2,12,22,0,1.7,0\n"),
                                    "s1");
    CHECK(store.panel.length() == 3);
    CHECK(store.panel.names == std::vector<std::string>{"beer__sales", "chips__sales", "beer__price", "chips__price",
                                                        "beer__promo", "chips__promo"});
    CHECK(store.panel.data(2, 1) == 22);
    CHECK(store.panel.data(0, 2) == 2.0);
    CHECK(store.weeks == std::vector<std::string>{"1", "2", "3"});
  }

  TEST_CASE("store diagnostics name the offending cell") {
    const std::string head = "week,a__sales,a__price\n";
    CHECK(error_of([&] { ingest_store(table_of(head + "1,1,2\n2,1,2\n2,1,2\n"), "s"); }).find("duplicate week '2'") !=
          std::string::npos);
    CHECK(error_of([&] { ingest_store(table_of(head + "1,1,2\n2,,2\n"), "s"); }).find("store.csv:3") !=
          std::string::npos);
    CHECK(error_of([&] { ingest_store(table_of(head + "1,1,2\n3,1,2\n"), "s"); }).find("does not follow") !=
          std::string::npos);
    CHECK_THROWS_AS(ingest_store(table_of("week,a__sales,a__cost\n1,1,2\n"), "s"), DataError);
    CHECK_THROWS_AS(ingest_store(table_of("week,a__sales,a__sales\n1,1,2\n"), "s"), DataError);
  }

  TEST_CASE("full-size store with 77 weeks and 50 columns") {
    std::ostringstream csv;
    csv << "week";
    for (int c = 0; c < 17; ++c) csv << ",cat" << c << "__sales";
    for (int c = 0; c < 17; ++c) csv << ",cat" << c << "__price";
    for (int c = 0; c < 16; ++c) csv << ",cat" << c << "__promo";
    csv << "\n";
    for (int w = 1; w <= 77; ++w) {
      csv << w;
      for (int c = 0; c < 50; ++c) csv << "," << (1.0 + 0.01 * ((w * 7 + c * 3) % 13));
      csv << "\n";
    }
    const auto store = ingest_store(table_of(csv.str()), "two_block");
    CHECK(store.panel.length() == 77);
    CHECK(store.panel.series() == 50);
    CHECK(store.panel.names[16] == "cat16__sales");
    CHECK(store.panel.names[49] == "cat15__promo");
  }

  TEST_CASE("schema drift across stores is reported") {
    const fs::path dir = scratch_dir("drift");
    write_file((dir / "s1.csv").string(), "week,a__sales,b__sales\n1,1,2\n2,1,2\n");
    write_file((dir / "s2.csv").string(), "week,a__sales\n1,1\n2,1\n");
    write_file((dir / "s3.csv").string(), "week,b__sales,a__sales\n1,1,2\n2,1,2\n");
    CHECK(store_id((dir / "s1.csv").string()) == "s1");
    CHECK(ingest({(dir / "s1.csv").string()}).size() == 1);
    CHECK(error_of([&] { ingest({(dir / "s1.csv").string(), (dir / "s2.csv").string()}); }).find("schema drift") !=
          std::string::npos);
    CHECK(error_of([&] { ingest({(dir / "s1.csv").string(), (dir / "s3.csv").string()}); }).find("schema drift") !=
          std::string::npos);
  }

  TEST_CASE("transform examples") {
    Matrix levels(2, 1);
    levels << 100, 110;
    const TransformPlan plan{{Rule::log_diff}};
    const auto d = transform(TimeSeriesPanel(levels, {"x__sales"}), plan);
    CHECK(d.length() == 1);
    CHECK(d.data(0, 0) == doctest::Approx(std::log(1.1)).epsilon(1e-14));
    CHECK(invert_transform(Vector::Zero(1), Vector::Constant(1, 100.0), plan)(0) == doctest::Approx(100.0));
    CHECK(parse_rule("log-diff") == Rule::log_diff);
    CHECK_THROWS_AS(parse_rule("sqrt"), ConfigError);
    const auto defaults = TransformPlan::defaults_for({"a__sales", "a__price", "a__promo", "other"});
    CHECK(defaults.rules == std::vector<Rule>{Rule::log_diff, Rule::log_diff, Rule::diff, Rule::none});
  }

  TEST_CASE("transform round trip reproduces realized levels") {
    Rng rng(3);
    Matrix levels(40, 3);
    for (int t = 0; t < 40; ++t)
      for (int k = 0; k < 3; ++k) levels(t, k) = std::exp(rng.normal()) * (k + 1);
    const TransformPlan plan{{Rule::log_diff, Rule::diff, Rule::none}};
    const auto changes = transform(TimeSeriesPanel(levels), plan);
    const Matrix back = invert_panel(changes.data, levels.row(0).transpose(), plan);
    // Rule none keeps the later row of each pair, so row 0 is not recoverable there.
    CHECK((back.leftCols(2) - levels.leftCols(2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.col(2).tail(39) - levels.col(2).tail(39)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("nonpositive values under a log rule are located") {
    Matrix levels(3, 1);
    levels << 1, 0, 2;
    const auto msg = error_of([&] { transform(TimeSeriesPanel(levels, {"x__sales"}), {{Rule::log_diff}}); });
    CHECK(msg.find("x__sales") != std::string::npos);
    CHECK(msg.find("row") != std::string::npos);
  }

  TEST_CASE("nearly noise-free AR(1) is forecast almost exactly") {
    const double c = std::cos(0.3) * 0.99, s = std::sin(0.3) * 0.99;
    auto coefs = VarCoefficients::zeros(2, 1);
    coefs.lags[0] << c, -s, s, c;
    Matrix init(1, 2);
    init << 1.0, 0.0;
    // Exactly noise-free data would give a singular residual covariance.
    Rng rng(8);
    const Matrix y = propagate_var(coefs, init, 1e-7 * testing::random_matrix(rng, 60, 2));
    const Fitter ls = [](const TimeSeriesPanel& p) { return benchmarks::ls_fit(p, 1); };
    const auto r = rolling_forecast(TimeSeriesPanel(y, {"u", "v"}), ls, 20, 60);
    CHECK(r.origins.size() == 40);
    CHECK(r.failures.empty());
    CHECK((r.forecasts - r.actuals).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(r.origins.front() == 20);
  }

  TEST_CASE("level forecasts invert through the last observed level") {
    auto coefs = VarCoefficients::zeros(1, 1);
    coefs.lags[0](0, 0) = 0.5;
    Matrix init(1, 1);
    init << 0.2;
    const Matrix growth = propagate_var(coefs, init, Matrix::Zero(30, 1));
    Matrix levels(31, 1);
    levels(0, 0) = 100.0;
    for (int t = 0; t < 30; ++t) levels(t + 1, 0) = levels(t, 0) * std::exp(growth(t, 0));
    const Fitter ls = [](const TimeSeriesPanel& p) { return benchmarks::ls_fit(p, 1); };
    const auto r = rolling_forecast_levels(TimeSeriesPanel(levels, {"a__sales"}), {{Rule::log_diff}}, ls, 10, 29);
    CHECK(r.level_space);
    CHECK((r.forecasts - r.actuals).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("zero-coefficient truth forecasts near zero") {
    const auto truth = VarCoefficients::zeros(3, 1);
    const auto panel = simulate_var(truth, ErrorModel::from_sigma(Matrix::Identity(3, 3)), 60, 4);
    const Fitter sparse = [](const TimeSeriesPanel& p) { return fit_method("sparse", p, 1); };
    const auto r = rolling_forecast(panel, sparse, 50, 60);
    CHECK(r.forecasts.cwiseAbs().maxCoeff() < 0.5);
  }

  TEST_CASE("failed origins are recorded and skipped") {
    Rng rng(5);
    const Matrix y = testing::random_matrix(rng, 30, 2);
    const Fitter flaky = [](const TimeSeriesPanel& p) {
      if (p.data(0, 0) > 0.0) throw NumericalError("no");
      return benchmarks::ls_fit(p, 1);
    };
    const auto r = rolling_forecast(TimeSeriesPanel(y), flaky, 10, 30);
    CHECK(r.origins.size() + r.failures.size() == 20);
    CHECK_FALSE(r.failures.empty());
    CHECK_FALSE(r.origins.empty());
    CHECK(static_cast<Eigen::Index>(r.origins.size()) == r.forecasts.rows());
    for (const auto& f : r.failures) CHECK(y(f.origin - 10, 0) > 0.0);
  }

  TEST_CASE("majority threshold: 8 of 15 stores is an edge, 7 is not") {
    const auto present = extract_network(stores_with_support(8, 15), Channel::price);
    REQUIRE(present.edges.size() == 1);
    CHECK(present.edges[0].source == "a");
    CHECK(present.edges[0].target == "b");
    CHECK(present.edges[0].support == 8);
    CHECK(present.influence("a") == 1);
    CHECK(present.responsiveness("b") == 1);
    CHECK(extract_network(stores_with_support(7, 15), Channel::price).edges.empty());
    CHECK(extract_network(stores_with_support(15, 15), Channel::promo).edges.empty());
    // Own effects are kept apart from the edges.
    CHECK(present.within.size() == 2);
  }

  TEST_CASE("all-zero fits give an empty network") {
    FitResult fit = store_fit(false);
    for (auto& lag : fit.coefficients.lags) lag.setZero();
    for (const auto ch : {Channel::sales, Channel::price, Channel::promo})
      CHECK(extract_network(std::vector<FitResult>(5, fit), ch).edges.empty());
  }

  TEST_CASE("adding a supporting store never removes an edge") {
    for (int total = 1; total <= 16; ++total)
      for (int present = 0; present <= total; ++present) {
        const bool before = !extract_network(stores_with_support(present, total), Channel::price).edges.empty();
        auto more = stores_with_support(present, total);
        more.push_back(store_fit(true));
        const bool after = !extract_network(more, Channel::price).edges.empty();
        CHECK((!before || after));
      }
  }

  TEST_CASE("network inputs must agree on series names") {
    auto fits = stores_with_support(2, 3);
    fits[1].names[0] = "z__sales";
    CHECK_THROWS_AS(extract_network(fits, Channel::price), DataError);
  }

  TEST_CASE("prevalence and export formats") {
    const auto fits = stores_with_support(2, 2);
    const auto p = prevalence(fits, Channel::price);
    CHECK(p.within == doctest::Approx(0.0));
    CHECK(p.cross == doctest::Approx(1.0 / 2.0));
    const auto net = extract_network(fits, Channel::price);
    std::ostringstream edges, graphml, dot;
    write_edges_csv(edges, {net});
    write_graphml(graphml, {net});
    write_dot(dot, {net});
    CHECK(edges.str().find("a,b,price,2,2,cross") != std::string::npos);
    CHECK(graphml.str().find("<graphml") != std::string::npos);
    CHECK(dot.str().find("\"a\" -> \"b\"") != std::string::npos);
  }

  TEST_CASE("fit files round trip") {
    FitResult fit = store_fit(true);
    fit.method = "sparse";
    fit.lambda1 = 0.125;
    fit.means = Vector::LinSpaced(6, 0.1, 0.6);
    fit.objective_trace = {3.0, 2.5};
    const auto back = fit_from_json(to_json(fit));
    CHECK(back.coefficients.stacked() == fit.coefficients.stacked());
    CHECK(back.means == fit.means);
    CHECK(back.names == fit.names);
    CHECK(back.lambda1 == 0.125);
    auto doc = to_json(fit);
    doc.erase("sigma");
    CHECK(error_of([&] { fit_from_json(doc); }).find("'sigma'") != std::string::npos);
  }

  TEST_CASE("methods dispatch and lag selection rules") {
    CHECK(method_names().size() == 6);
    CHECK_THROWS_AS(check_method("ols"), ConfigError);
    const auto panel = simulate_var(VarCoefficients::zeros(2, 1), ErrorModel::from_sigma(Matrix::Identity(2, 2)), 40, 2);
    const auto fit = fit_method("ls", panel, 1);
    CHECK(fit.method == "ls");
    CHECK(fit.means.size() == 2);
    CHECK_THROWS_AS(fit_method("ls", panel, 0), ConfigError);
    const auto refit = fixed_tuning_refit(fit);
    CHECK(refit(panel).p == 1);
  }

  TEST_CASE("config schema errors carry the JSON path") {
    using nlohmann::json;
    CHECK_NOTHROW(parse_experiment(json::parse(R"({"design": "two_block", "T": 50})")));
    CHECK(error_of([] { parse_experiment(json::parse(R"({"T": -1})")); }).rfind("config.T:", 0) == 0);
    CHECK(error_of([] { parse_experiment(json::parse(R"({"forecast": {"T": 60, "S": 70}})")); })
              .rfind("config.forecast.S:", 0) == 0);
    CHECK(error_of([] { parse_experiment(json::parse(R"({"methods": ["sparse", "ols"]})")); })
              .rfind("config.methods[1]:", 0) == 0);
    CHECK(error_of([] { parse_experiment(json::parse(R"({"sparse": {"outer_tol": "x"}})")); })
              .rfind("config.sparse.outer_tol:", 0) == 0);
    CHECK(error_of([] { parse_experiment(json::parse(R"({"bogus": 1})")); }).find("unknown key") != std::string::npos);
    CHECK(error_of([] { parse_experiment(json::parse(R"({"design": {"lags": [[[1.5]]], "sigma": [[1]]}})")); })
              .find("not stable") != std::string::npos);
  }

  TEST_CASE("bundled configs parse") {
    for (const char* name : {"table1.json", "smoke.json"}) {
      const auto c = read_experiment(std::string(SPARSEVAR_SOURCE_DIR) + "/configs/" + name);
      CHECK(c.methods.size() == 6);
      CHECK(c.forecast.has_value());
    }
  }

  TEST_CASE("experiments are byte-reproducible from the config and seed") {
    const fs::path a = scratch_dir("exp_a"), b = scratch_dir("exp_b");
    auto config = parse_experiment(nlohmann::json::parse(
        R"({"T": 50, "replicates": 2, "seed": 3, "methods": ["sparse", "ls", "minnesota"],
            "forecast": {"T": 54, "S": 50}, "irf": {"horizon": 4}})"));
    config.output_dir = a.string();
    const auto ra = run_experiment(config);
    config.output_dir = b.string();
    run_experiment(config);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename().string());
    CHECK(names.size() >= 7);
    for (const auto& n : names) {
      CAPTURE(n);
      CHECK(slurp(a / n) == slurp(b / n));
    }
    for (const auto& rec : ra.records[0]) {
      CHECK(testing::trace_monotone(rec.fit.objective_trace));
      CHECK(testing::group_structure_holds(rec.fit.coefficients));
    }
    CHECK(slurp(a / "table.txt").find("sparse") != std::string::npos);
  }
}
