#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar::eval {

// Mean absolute estimation error over runs and all p q^2 coefficients.
double maee(const std::vector<VarCoefficients>& estimates, const VarCoefficients& truth);
double maee(const VarCoefficients& estimate, const VarCoefficients& truth);

// A cell counts as estimated nonzero iff its stored value is != 0.
double tpr(const VarCoefficients& estimate, const VarCoefficients& truth);
double tnr(const VarCoefficients& estimate, const VarCoefficients& truth);

// Mean absolute forecast error over all rows and series of aligned panels.
double mafe(const Matrix& forecasts, const Matrix& actuals);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

// Two-sided paired t-test on a - b.
TestResult paired_t(const std::vector<double>& a, const std::vector<double>& b);

// Diebold-Mariano test on the absolute-error loss differential
// d_t = |e_a,t| - |e_b,t|, with the long-run variance from autocovariances up
// to lag horizon - 1 and a standard normal p-value.
TestResult diebold_mariano(const std::vector<double>& errors_a, const std::vector<double>& errors_b, int horizon = 1);
// Same, from a precomputed loss differential.
TestResult diebold_mariano_differential(const std::vector<double>& d, int horizon = 1);

struct ConcordanceResult {
  double w = 0.0;
  double chi_square = 0.0;
  double p_value = 1.0;
  // Every judge ties every item, so W is undefined.
  bool degenerate = false;
};

// Kendall's W for scores[judge][item]. Each judge's scores are converted to
// average ranks (higher score, higher rank) and W is tie-corrected:
//   W = 12 S / (m^2 (n^3 - n) - m sum_t (t^3 - t)).
// p-value from chi-square = m (n - 1) W with n - 1 degrees of freedom.
ConcordanceResult kendall_w(const std::vector<std::vector<double>>& scores);

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // Monte Carlo standard error, sd / sqrt(runs)
  int runs = 0;
};
Summary summarize(const std::vector<double>& values);

// Per-run metric values of one method. Empty vectors mean not computed.
struct MethodMetrics {
  std::string method;
  std::vector<double> maee, tpr, tnr, mafe;
};

struct PairwiseTest {
  std::string metric;
  std::string method_a, method_b;
  std::string test;
  TestResult result;
};

struct MetricReport {
  std::vector<MethodMetrics> methods;
  std::vector<PairwiseTest> tests;

  const MethodMetrics& find(const std::string& method) const;
  // Paired t-tests on every pair of methods for MAEE and MAFE.
  void add_paired_tests();
  void write_csv(std::ostream& out) const;
  void write_tests_csv(std::ostream& out) const;
  // Text table with one row per method and columns MAEE, TPR, TNR, MAFE.
  std::string table() const;
};

}  // namespace sparsevar::eval
