#pragma once

#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar::glasso {

// S = (1/n) E'E for the n x q residual matrix E = Y - x0 B.
Matrix residual_covariance(const StackedDesign& stacked, const Vector& beta);

struct PenalizedPrecisionProblem {
  Matrix s;
  double lambda2 = 0.0;
};

struct GlassoOptions {
  double tolerance = 1e-6;        // outer: max entry change of Omega per sweep
  double inner_tolerance = 1e-7;  // column lasso coordinate descent
  int max_sweeps = 2000;
  int max_inner = 5000;
};

struct GlassoResult {
  ErrorModel model;
  bool converged = false;
  int sweeps = 0;
  double kkt_violation = 0.0;
  // Objective after each sweep.
  std::vector<double> objective_trace;
};

// trace(S Omega) - log|Omega| + lambda2 * sum_{k != k'} |Omega_kk'|.
// Returns +inf when Omega is not positive definite.
double objective(const Matrix& s, const Matrix& omega, double lambda2);

// Largest entry of |S - Omega^{-1} + lambda2 * Gamma| with Gamma the
// off-diagonal subgradient of the l1 penalty (diagonal unpenalized).
double kkt_violation(const Matrix& s, const Matrix& omega, double lambda2);

// Number of free parameters in Omega: the diagonal plus the nonzero
// upper-triangle entries.
int free_parameters(const Matrix& omega);

// Minimizes the objective above by block coordinate descent on the rows and
// columns of Omega. Each block step keeps the Schur complement fixed at
// 1/S_jj and solves a lasso for the off-diagonal column, so Omega stays
// symmetric positive definite and the objective never increases.
// `warm_omega`, when given and positive definite, is the starting point;
// otherwise the start is diag(1/S_kk).
GlassoResult solve(const PenalizedPrecisionProblem& problem, const GlassoOptions& options = {},
                   const Matrix& warm_omega = Matrix());

}  // namespace sparsevar::glasso
