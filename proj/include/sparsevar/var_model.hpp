#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sparsevar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Lag matrices B_1..B_p of a VAR(p). lags[j](k, l) is the effect of series l
// at lag j+1 on series k.
struct VarCoefficients {
  std::vector<Matrix> lags;

  static VarCoefficients zeros(int q, int p);

  int q() const { return lags.empty() ? 0 : static_cast<int>(lags.front().rows()); }
  int p() const { return static_cast<int>(lags.size()); }

  // Coefficients arranged so that Y = X0 * design_matrix(): row l*q + k,
  // column i holds lags[l](i, k).
  Matrix design_matrix() const;
  static VarCoefficients from_design_matrix(const Matrix& b, int q, int p);

  // Equation-major stacking used by the penalized solvers:
  // beta[i*p*q + l*q + k] = lags[l](i, k). Equal to vec(design_matrix()).
  Vector stacked() const;
  static VarCoefficients from_stacked(const Vector& beta, int q, int p);

  // Throws DimensionError unless there are p >= 1 square q x q finite lags.
  void validate() const;
  int nonzeros() const;
};

// Gaussian innovation model. Both the covariance and its inverse are kept so
// callers never invert on the hot path.
struct ErrorModel {
  Matrix sigma;
  Matrix omega;

  static ErrorModel from_sigma(const Matrix& sigma);
  static ErrorModel from_omega(const Matrix& omega);
  int q() const { return static_cast<int>(sigma.rows()); }
};

// T x q block of observations with column labels and the means removed by
// center() (zero when the panel is uncentered).
struct TimeSeriesPanel {
  Matrix data;
  std::vector<std::string> names;
  Vector means;

  TimeSeriesPanel() = default;
  explicit TimeSeriesPanel(Matrix values, std::vector<std::string> labels = {});

  int length() const { return static_cast<int>(data.rows()); }
  int series() const { return static_cast<int>(data.cols()); }
  // Rows [first, first + count) with the same labels and means.
  TimeSeriesPanel slice(int first, int count) const;
};

// Regression form of a VAR(p): responses (n x q, equation i in column i) and
// the lag matrix x0 (n x pq). Column l*q + k of x0 is series k at lag l+1.
// The stacked response vector y of length nq is vec(responses), i.e. equation
// 1 first, and the full design is X = I_q (x) x0.
struct StackedDesign {
  Matrix responses;
  Matrix x0;
  int q = 0;
  int p = 0;

  int n() const { return static_cast<int>(responses.rows()); }
  Eigen::Map<const Vector> y() const { return {responses.data(), responses.size()}; }
};

// Simulates T rows of the VAR after discarding burn_in rows, starting from
// zeros. Innovations are drawn from N(0, err.sigma) using a lower Cholesky
// factor. Throws NumericalError when the companion spectral radius is >= 1.
TimeSeriesPanel simulate_var(const VarCoefficients& coefs, const ErrorModel& err, int length,
                             std::uint64_t seed, int burn_in = 200);

// Runs the recursion y_t = sum_j B_j y_{t-j} + e_t with explicit innovations.
// `initial` holds p rows (oldest first) that precede the output; the output
// has innovations.rows() rows.
Matrix propagate_var(const VarCoefficients& coefs, const Matrix& initial, const Matrix& innovations);

StackedDesign stack(const TimeSeriesPanel& panel, int p);

TimeSeriesPanel center(const TimeSeriesPanel& panel);
TimeSeriesPanel uncenter(const TimeSeriesPanel& panel);

// Companion matrix [B_1 ... B_p; I 0] of size pq x pq.
Matrix companion_matrix(const VarCoefficients& coefs);
double stability_check(const VarCoefficients& coefs);
inline bool is_stable(const VarCoefficients& coefs) { return stability_check(coefs) < 1.0; }

}  // namespace sparsevar
