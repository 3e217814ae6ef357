#pragma once

#include <vector>

#include "sparsevar/fit_result.hpp"
#include "sparsevar/glasso.hpp"
#include "sparsevar/grouplasso.hpp"

namespace sparsevar::estimator {

enum class Criterion { bic, aic };

struct FitConfig {
  std::vector<int> p_candidates{1, 2, 3, 4};
  int lambda1_grid_size = 50;
  double lambda1_grid_ratio = 1e-3;
  int lambda2_grid_size = 20;
  double lambda2_grid_ratio = 1e-3;
  double outer_tol = 1e-3;
  int outer_max_iter = 50;
  // Outer iterations during which lambda1 and lambda2 are re-selected before
  // being frozen.
  int selection_iterations = 2;
  Criterion criterion = Criterion::bic;
  grouplasso::GroupPenalty group_penalty = grouplasso::GroupPenalty::standardized;
  grouplasso::GroupLassoOptions grouplasso;
  glasso::GlassoOptions glasso;

  void validate() const;
};

// Log-spaced grid from `top` down to ratio * top (size points). A zero top
// yields the single point {0}.
std::vector<double> log_grid(double top, double ratio, int size);

// (1/n)(y - X beta)' (Omega (x) I_n) (y - X beta) - log|Omega|
//   + lambda1 * sum_g ||R_g beta_g|| + lambda2 * sum_{k != k'} |Omega_kk'|
// where R_g is the penalty weight of the group (see grouplasso::GroupPenalty).
double penalized_objective(const StackedDesign& stacked, const Vector& beta, const Matrix& omega, double lambda1,
                           double lambda2,
                           grouplasso::GroupPenalty penalty = grouplasso::GroupPenalty::standardized);

// -2 log L + k * log(n) (or 2k for AIC) for the full Gaussian likelihood,
//   -2 log L = n q log(2 pi) + n (trace(S Omega) - log|Omega|),
// with k = nonzero coefficients + free precision parameters and n = T - p.
double information_criterion(const StackedDesign& stacked, const Vector& beta, const Matrix& omega,
                             Criterion criterion = Criterion::bic);

// Alternates the beta-step (group lasso on whitened data) and the Omega-step
// (graphical lasso on the residual covariance) from Omega = I until the
// largest change in beta and Omega is below config.outer_tol. A block update
// is accepted only if it does not increase the penalized objective, which
// keeps the recorded trace non-increasing.
FitResult alternate_fit(const TimeSeriesPanel& panel, int p, double lambda1, double lambda2,
                        const FitConfig& config = {});

// Same, continuing from a given (beta, Omega).
FitResult alternate_fit_from(const StackedDesign& stacked, double lambda1, double lambda2, const FitConfig& config,
                             const Vector& beta_start, const Matrix& omega_start);

struct LambdaSelection {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  FitResult fit;
  // Criterion values over the grids at the last selection iteration.
  std::vector<double> lambda1_grid, lambda1_scores;
  std::vector<double> lambda2_grid, lambda2_scores;
};

// BIC for a beta-step candidate on the whitened regression with nq rows,
//   nq log(||y~ - X~ beta||^2 / nq) + df * log(n),
// profiling out the residual scale, with df the group-lasso degrees of
// freedom (grouplasso::group_degrees_of_freedom).
// `rows` is nq and `n` the number of time points entering the log(n) weight.
double lambda1_score(double whitened_rss, double degrees_of_freedom, int rows, int n,
                     Criterion criterion = Criterion::bic);
// BIC for an Omega-step candidate at fixed beta:
// -2 log L = n (trace(S Omega) - log|Omega|), k = free precision parameters.
double lambda2_score(const Matrix& s, const Matrix& omega, int n, Criterion criterion = Criterion::bic);

// Selects lambda1 and lambda2 inside the first config.selection_iterations
// outer iterations, then freezes them and iterates to convergence.
LambdaSelection select_lambdas(const TimeSeriesPanel& panel, int p, const FitConfig& config = {});

// Runs select_lambdas for every candidate lag order and returns the fit with
// the smallest information criterion; ties go to the smaller p.
FitResult select_p(const TimeSeriesPanel& panel, const FitConfig& config = {});

}  // namespace sparsevar::estimator
