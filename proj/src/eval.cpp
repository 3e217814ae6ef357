#include "sparsevar/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sparsevar/errors.hpp"

namespace sparsevar::eval {

namespace {

void check_shapes(const VarCoefficients& a, const VarCoefficients& b) {
  if (a.p() != b.p() || a.q() != b.q()) {
    throw DimensionError(fmt::format("coefficient shapes differ: p={} q={} versus p={} q={}", a.p(), a.q(), b.p(),
                                     b.q()));
  }
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

double maee(const VarCoefficients& estimate, const VarCoefficients& truth) {
  check_shapes(estimate, truth);
  double total = 0.0;
  for (int l = 0; l < truth.p(); ++l)
    total += (estimate.lags[static_cast<std::size_t>(l)] - truth.lags[static_cast<std::size_t>(l)]).cwiseAbs().sum();
  return total / (static_cast<double>(truth.p()) * truth.q() * truth.q());
}

double maee(const std::vector<VarCoefficients>& estimates, const VarCoefficients& truth) {
  if (estimates.empty()) throw DataError("maee needs at least one estimate");
  double total = 0.0;
  for (const auto& e : estimates) total += maee(e, truth);
  return total / static_cast<double>(estimates.size());
}

double tpr(const VarCoefficients& estimate, const VarCoefficients& truth) {
  check_shapes(estimate, truth);
  int positives = 0, found = 0;
  for (int l = 0; l < truth.p(); ++l) {
    const auto& t = truth.lags[static_cast<std::size_t>(l)];
    const auto& e = estimate.lags[static_cast<std::size_t>(l)];
    positives += static_cast<int>((t.array() != 0.0).count());
    found += static_cast<int>(((t.array() != 0.0) && (e.array() != 0.0)).count());
  }
  if (positives == 0) throw DataError("true positive rate is undefined: the truth has no nonzero coefficients");
  return static_cast<double>(found) / positives;
}

double tnr(const VarCoefficients& estimate, const VarCoefficients& truth) {
  check_shapes(estimate, truth);
  int negatives = 0, found = 0;
  for (int l = 0; l < truth.p(); ++l) {
    const auto& t = truth.lags[static_cast<std::size_t>(l)];
    const auto& e = estimate.lags[static_cast<std::size_t>(l)];
    negatives += static_cast<int>((t.array() == 0.0).count());
    found += static_cast<int>(((t.array() == 0.0) && (e.array() == 0.0)).count());
  }
  if (negatives == 0) throw DataError("true negative rate is undefined: the truth has no zero coefficients");
  return static_cast<double>(found) / negatives;
}

double mafe(const Matrix& forecasts, const Matrix& actuals) {
  if (forecasts.rows() != actuals.rows() || forecasts.cols() != actuals.cols()) {
    throw DimensionError(fmt::format("forecasts ({}x{}) and actuals ({}x{}) are not aligned", forecasts.rows(),
                                     forecasts.cols(), actuals.rows(), actuals.cols()));
  }
  if (forecasts.size() == 0) throw DataError("mafe needs at least one forecast");
  return (forecasts - actuals).cwiseAbs().mean();
}

TestResult paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("paired samples differ in length");
  if (a.size() < 2) throw DataError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TestResult out;
  if (sd == 0.0) {
    out.degenerate = true;
    if (mean == 0.0) {
      out.statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.statistic = mean > 0.0 ? INFINITY : -INFINITY;
      out.p_value = 0.0;
    }
    return out;
  }
  out.statistic = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.statistic)));
  return out;
}

TestResult diebold_mariano_differential(const std::vector<double>& d, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  if (d.size() < 10) throw DataError("Diebold-Mariano test needs at least 10 forecast errors");
  const auto n = static_cast<double>(d.size());
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  auto autocov = [&](int lag) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(lag); t < d.size(); ++t)
      s += (d[t] - mean) * (d[t - static_cast<std::size_t>(lag)] - mean);
    return s / n;
  };
  double lrv = autocov(0);
  for (int k = 1; k < horizon; ++k) lrv += 2.0 * autocov(k);
  TestResult out;
  if (!(lrv > 0.0)) {
    out.degenerate = true;
    out.statistic = 0.0;
    out.p_value = mean == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.statistic = mean / std::sqrt(lrv / n);
  out.p_value = normal_two_sided(out.statistic);
  return out;
}

TestResult diebold_mariano(const std::vector<double>& errors_a, const std::vector<double>& errors_b, int horizon) {
  if (errors_a.size() != errors_b.size()) throw DimensionError("forecast error series differ in length");
  std::vector<double> d(errors_a.size());
  for (std::size_t t = 0; t < d.size(); ++t) d[t] = std::abs(errors_a[t]) - std::abs(errors_b[t]);
  return diebold_mariano_differential(d, horizon);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

ConcordanceResult kendall_w(const std::vector<std::vector<double>>& scores) {
  const std::size_t m = scores.size();
  if (m < 2) throw DataError("Kendall's W needs at least two judges");
  const std::size_t n = scores.front().size();
  if (n < 3) throw DataError("Kendall's W needs at least three items");
  for (const auto& row : scores)
    if (row.size() != n) throw DimensionError("every judge must score the same items");

  std::vector<double> sums(n, 0.0);
  double ties = 0.0;
  for (const auto& row : scores) {
    const auto ranks = average_ranks(row);
    for (std::size_t i = 0; i < n; ++i) sums[i] += ranks[i];
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      ties += t * t * t - t;
      i = j + 1;
    }
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double mean_sum = md * (nd + 1.0) / 2.0;
  double s = 0.0;
  for (double r : sums) s += (r - mean_sum) * (r - mean_sum);
  const double denom = md * md * (nd * nd * nd - nd) - md * ties;

  ConcordanceResult out;
  if (!(denom > 0.0)) {
    out.degenerate = true;
    out.w = NAN;
    out.chi_square = NAN;
    out.p_value = NAN;
    return out;
  }
  out.w = 12.0 * s / denom;
  out.chi_square = md * (nd - 1.0) * out.w;
  const boost::math::chi_squared dist(nd - 1.0);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi_square));
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary out;
  out.runs = static_cast<int>(values.size());
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

const MethodMetrics& MetricReport::find(const std::string& method) const {
  for (const auto& m : methods)
    if (m.method == method) return m;
  throw ConfigError("no metrics for method '" + method + "'");
}

void MetricReport::add_paired_tests() {
  auto run = [&](const char* metric, auto member) {
    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = a + 1; b < methods.size(); ++b) {
        const auto& va = methods[a].*member;
        const auto& vb = methods[b].*member;
        if (va.size() < 2 || va.size() != vb.size()) continue;
        tests.push_back({metric, methods[a].method, methods[b].method, "paired_t", paired_t(va, vb)});
      }
    }
  };
  run("maee", &MethodMetrics::maee);
  run("mafe", &MethodMetrics::mafe);
}

namespace {

std::string cell(const std::vector<double>& v, const char* spec) {
  if (v.empty()) return "-";
  return fmt::format(fmt::runtime(spec), summarize(v).mean);
}

}  // namespace

void MetricReport::write_csv(std::ostream& out) const {
  out << "method,metric,mean,se,runs\n";
  for (const auto& m : methods) {
    const std::pair<const char*, const std::vector<double>*> rows[] = {
        {"maee", &m.maee}, {"tpr", &m.tpr}, {"tnr", &m.tnr}, {"mafe", &m.mafe}};
    for (const auto& [name, values] : rows) {
      if (values->empty()) continue;
      const Summary s = summarize(*values);
      out << fmt::format("{},{},{},{},{}\n", m.method, name, s.mean, s.se, s.runs);
    }
  }
}

void MetricReport::write_tests_csv(std::ostream& out) const {
  out << "metric,method_a,method_b,test,statistic,p_value\n";
  for (const auto& t : tests) {
    out << fmt::format("{},{},{},{},{},{}\n", t.metric, t.method_a, t.method_b, t.test, t.result.statistic,
                       t.result.p_value);
  }
}

std::string MetricReport::table() const {
  std::string out = fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "Method", "MAEE", "TPR", "TNR", "MAFE");
  for (const auto& m : methods) {
    out += fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}\n", m.method, cell(m.maee, "{:.3f}"), cell(m.tpr, "{:.3f}"),
                       cell(m.tnr, "{:.3f}"), cell(m.mafe, "{:.3f}"));
  }
  return out;
}

}  // namespace sparsevar::eval
