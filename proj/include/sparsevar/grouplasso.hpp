#pragma once

#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar::grouplasso {

// Partition of the p*q^2 stacked coefficients into q^2 groups. Group
// g = i*q + k holds the p coefficients of series k's lags in equation i,
// i.e. stacked indices i*p*q + l*q + k for l = 0..p-1.
struct GroupStructure {
  int q = 0;
  int p = 0;

  static GroupStructure for_var(int q, int p) { return {q, p}; }

  int group_count() const { return q * q; }
  int group_size() const { return p; }
  int equation(int g) const { return g / q; }
  int predictor(int g) const { return g % q; }
  int index(int g, int lag) const { return equation(g) * p * q + lag * q + predictor(g); }
  std::vector<int> indices(int g) const;
};

// How the Euclidean norm of each group is measured.
//  standardized: ||R_k beta_g|| where R_k'R_k = x0_k'x0_k / n is the Cholesky
//    factor of the Gram block of predictor series k (its p lag columns).
//    This is the group lasso on blockwise-orthonormalized predictors, which
//    makes the penalty invariant to the scale and lag correlation of each
//    series.
//  unweighted: plain ||beta_g||.
enum class GroupPenalty { standardized, unweighted };

// Weighted regression y~ = P y, X~ = P X with P = U (x) I_n, where U is the
// upper Cholesky factor of the precision matrix (Omega = U'U). Since
// X = I_q (x) x0, the whitened design is U (x) x0 and is kept in that
// factored form.
struct WhitenedProblem {
  Vector y_tilde;
  Matrix factor;  // U, upper triangular
  Matrix x0;
  int q = 0;
  int p = 0;
  // Per predictor series k, the p x p upper-triangular penalty weight R_k.
  // Empty means identity weights.
  std::vector<Matrix> weights;

  int n() const { return static_cast<int>(x0.rows()); }
  // X~ beta, length n*q.
  Vector apply(const Vector& beta) const;
  // X~' v for v of length n*q.
  Vector apply_transpose(const Vector& v) const;
  // Materialized X~ (n*q x p*q^2). Test and debugging use only.
  Matrix dense_design() const;
};

// Upper Cholesky factor of a symmetric positive-definite matrix. Throws
// NumericalError naming the first leading minor that is not positive.
Matrix upper_cholesky(const Matrix& spd);

// Penalty weights for `penalty`; identity for series whose lag block is
// rank deficient.
std::vector<Matrix> penalty_weights(const Matrix& x0, int q, int p, GroupPenalty penalty);

WhitenedProblem whiten(const StackedDesign& stacked, const Matrix& omega,
                       GroupPenalty penalty = GroupPenalty::standardized);

// ||R_k beta_g|| for group g (||beta_g|| with identity weights).
double group_norm(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta, int g);

// Unpenalized GLS estimate. With design I_q (x) x0 it reduces to equation-wise
// least squares and does not depend on Omega; the minimum-norm solution is
// used when x0 is rank deficient.
Vector unpenalized_fit(const WhitenedProblem& problem);

// Degrees of freedom of a group-lasso solution in the form of Yuan and Lin:
//   sum_g 1{||gamma_g|| > 0} + sum_g ||gamma_g|| / ||gamma_g^LS|| * (p - 1)
// with gamma_g = R_g beta_g and gamma^LS from unpenalized_fit.
double group_degrees_of_freedom(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta,
                                const Vector& unpenalized);

// Smallest lambda1 at which beta = 0 satisfies the optimality conditions of
//   (1/n) ||y~ - X~ beta||^2 + lambda1 * sum_g ||R_g beta_g||,
// namely max_g (2/n) ||R_g^{-T} X~_g' y~||.
double lambda1_max(const WhitenedProblem& problem, const GroupStructure& groups);

struct GroupLassoOptions {
  double tolerance = 1e-7;  // max |beta change| over a sweep
  int max_sweeps = 10000;
  double kkt_tolerance = 1e-5;
  int max_inner = 500;
  double inner_tolerance = 1e-12;
};

struct GroupLassoResult {
  Vector beta;
  bool converged = false;
  int sweeps = 0;
  double kkt_violation = 0.0;
  int active_groups = 0;
  // Objective after each sweep.
  std::vector<double> objective_trace;
};

double objective(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta, double lambda1);

// Residual sum of squares ||y~ - X~ beta||^2 (no 1/n factor).
double whitened_rss(const WhitenedProblem& problem, const Vector& beta);

// Largest violation of the group optimality conditions, measured in the
// weighted coordinates gamma_g = R_g beta_g with c_g = (2/n) R_g^{-T} X~_g' r.
// For a zero group the violation is max(0, ||c_g|| - lambda1); for an active
// group it is ||c_g - lambda1 * gamma_g / ||gamma_g|| ||. With identity
// weights this is the plain group-lasso KKT condition.
double kkt_violation(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta,
                     double lambda1);

// Block coordinate descent over groups in fixed (equation-major) order.
// `warm_start`, when non-empty, initializes beta.
GroupLassoResult solve(const WhitenedProblem& problem, const GroupStructure& groups, double lambda1,
                       const GroupLassoOptions& options = {}, const Vector& warm_start = Vector());

// Solves along a lambda grid, warm-starting each point from the previous one.
std::vector<GroupLassoResult> solve_path(const WhitenedProblem& problem, const GroupStructure& groups,
                                         const std::vector<double>& lambdas, const GroupLassoOptions& options = {});

int active_group_count(const GroupStructure& groups, const Vector& beta);

}  // namespace sparsevar::grouplasso
