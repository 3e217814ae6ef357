#include "sparsevar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "sparsevar/errors.hpp"
#include "sparsevar/parallel.hpp"

namespace sparsevar::estimator {

void FitConfig::validate() const {
  if (p_candidates.empty()) throw ConfigError("p_candidates must not be empty");
  for (int p : p_candidates)
    if (p < 1) throw ConfigError("lag orders must be at least 1");
  if (lambda1_grid_size < 1 || lambda2_grid_size < 1) throw ConfigError("grid sizes must be positive");
  if (!(lambda1_grid_ratio > 0.0 && lambda1_grid_ratio < 1.0) || !(lambda2_grid_ratio > 0.0 && lambda2_grid_ratio < 1.0))
    throw ConfigError("grid ratios must lie in (0, 1)");
  if (!(outer_tol > 0.0)) throw ConfigError("outer_tol must be positive");
  if (outer_max_iter < 1) throw ConfigError("outer_max_iter must be positive");
  if (selection_iterations < 1) throw ConfigError("selection_iterations must be positive");
}

std::vector<double> log_grid(double top, double ratio, int size) {
  if (!(top > 0.0)) return {0.0};
  std::vector<double> grid(static_cast<std::size_t>(size));
  if (size == 1) {
    grid[0] = top;
    return grid;
  }
  const double step = std::log(ratio) / (size - 1);
  for (int i = 0; i < size; ++i) grid[static_cast<std::size_t>(i)] = top * std::exp(step * i);
  grid.front() = top;
  return grid;
}

namespace {

double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double penalty_weight(int n, Criterion criterion) { return criterion == Criterion::bic ? std::log(n) : 2.0; }

int count_nonzero(const Vector& v) { return static_cast<int>((v.array() != 0.0).count()); }

double group_penalty(const std::vector<Matrix>& weights, const grouplasso::GroupStructure& groups, const Vector& beta) {
  double total = 0.0;
  Vector b(groups.p);
  for (int g = 0; g < groups.group_count(); ++g) {
    for (int l = 0; l < groups.p; ++l) b(l) = beta(groups.index(g, l));
    if (b.isZero(0.0)) continue;
    total += weights.empty() ? b.norm()
                             : (weights[static_cast<std::size_t>(groups.predictor(g))].triangularView<Eigen::Upper>() * b)
                                   .norm();
  }
  return total;
}

double off_diagonal_l1(const Matrix& omega) { return omega.cwiseAbs().sum() - omega.diagonal().cwiseAbs().sum(); }

FitResult package(const StackedDesign& stacked, const Vector& beta, const Matrix& omega, double lambda1,
                  double lambda2, Criterion criterion) {
  FitResult fit;
  fit.method = "sparse";
  fit.p = stacked.p;
  fit.lambda1 = lambda1;
  fit.lambda2 = lambda2;
  fit.coefficients = VarCoefficients::from_stacked(beta, stacked.q, stacked.p);
  fit.error = ErrorModel::from_omega(omega);
  fit.bic = information_criterion(stacked, beta, omega, criterion);
  return fit;
}

}  // namespace

double penalized_objective(const StackedDesign& stacked, const Vector& beta, const Matrix& omega, double lambda1,
                           double lambda2, grouplasso::GroupPenalty penalty) {
  const Matrix s = glasso::residual_covariance(stacked, beta);
  const auto groups = grouplasso::GroupStructure::for_var(stacked.q, stacked.p);
  const auto weights = grouplasso::penalty_weights(stacked.x0, stacked.q, stacked.p, penalty);
  return s.cwiseProduct(omega).sum() - log_det_spd(omega) + lambda1 * group_penalty(weights, groups, beta) +
         lambda2 * off_diagonal_l1(omega);
}

double information_criterion(const StackedDesign& stacked, const Vector& beta, const Matrix& omega,
                             Criterion criterion) {
  const int n = stacked.n();
  const Matrix s = glasso::residual_covariance(stacked, beta);
  const double minus_two_log_l = n * stacked.q * std::log(2.0 * std::numbers::pi) +
                                 n * (s.cwiseProduct(omega).sum() - log_det_spd(omega));
  const int k = count_nonzero(beta) + glasso::free_parameters(omega);
  return minus_two_log_l + k * penalty_weight(n, criterion);
}

double lambda1_score(double whitened_rss, double degrees_of_freedom, int rows, int n, Criterion criterion) {
  return rows * std::log(whitened_rss / rows) + degrees_of_freedom * penalty_weight(n, criterion);
}

double lambda2_score(const Matrix& s, const Matrix& omega, int n, Criterion criterion) {
  return n * (s.cwiseProduct(omega).sum() - log_det_spd(omega)) +
         glasso::free_parameters(omega) * penalty_weight(n, criterion);
}

FitResult alternate_fit_from(const StackedDesign& stacked, double lambda1, double lambda2, const FitConfig& config,
                             const Vector& beta_start, const Matrix& omega_start) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("penalty parameters must be nonnegative");
  const auto groups = grouplasso::GroupStructure::for_var(stacked.q, stacked.p);
  Vector beta = beta_start;
  Matrix omega = omega_start;
  double current = penalized_objective(stacked, beta, omega, lambda1, lambda2, config.group_penalty);
  std::vector<double> trace{current};
  bool converged = false;
  int iterations = 0;

  for (int it = 0; it < config.outer_max_iter; ++it) {
    ++iterations;
    double change = 0.0;

    const auto problem = grouplasso::whiten(stacked, omega, config.group_penalty);
    const auto step_beta = grouplasso::solve(problem, groups, lambda1, config.grouplasso, beta);
    const double with_beta = penalized_objective(stacked, step_beta.beta, omega, lambda1, lambda2, config.group_penalty);
    if (with_beta <= current) {
      change = std::max(change, (step_beta.beta - beta).cwiseAbs().maxCoeff());
      beta = step_beta.beta;
      current = with_beta;
    }

    const Matrix s = glasso::residual_covariance(stacked, beta);
    const auto step_omega = glasso::solve({s, lambda2}, config.glasso, omega);
    const double with_omega = penalized_objective(stacked, beta, step_omega.model.omega, lambda1, lambda2, config.group_penalty);
    if (with_omega <= current) {
      change = std::max(change, (step_omega.model.omega - omega).cwiseAbs().maxCoeff());
      omega = step_omega.model.omega;
      current = with_omega;
    }

    trace.push_back(current);
    if (change < config.outer_tol) {
      converged = true;
      break;
    }
  }

  FitResult fit = package(stacked, beta, omega, lambda1, lambda2, config.criterion);
  fit.objective_trace = std::move(trace);
  fit.converged = converged;
  fit.iterations = iterations;
  return fit;
}

FitResult alternate_fit(const TimeSeriesPanel& panel, int p, double lambda1, double lambda2, const FitConfig& config) {
  config.validate();
  const StackedDesign stacked = stack(panel, p);
  const Eigen::Index dim = static_cast<Eigen::Index>(p) * stacked.q * stacked.q;
  return alternate_fit_from(stacked, lambda1, lambda2, config, Vector::Zero(dim),
                            Matrix::Identity(stacked.q, stacked.q));
}

LambdaSelection select_lambdas(const TimeSeriesPanel& panel, int p, const FitConfig& config) {
  config.validate();
  const StackedDesign stacked = stack(panel, p);
  const int n = stacked.n();
  const int q = stacked.q;
  const auto groups = grouplasso::GroupStructure::for_var(q, p);

  LambdaSelection out;
  Vector beta = Vector::Zero(static_cast<Eigen::Index>(p) * q * q);
  Matrix omega = Matrix::Identity(q, q);

  for (int it = 0; it < config.selection_iterations; ++it) {
    // beta-step over the lambda1 grid at the current Omega
    const auto problem = grouplasso::whiten(stacked, omega, config.group_penalty);
    out.lambda1_grid = log_grid(grouplasso::lambda1_max(problem, groups), config.lambda1_grid_ratio,
                                config.lambda1_grid_size);
    const auto path = grouplasso::solve_path(problem, groups, out.lambda1_grid, config.grouplasso);
    const Vector unpenalized = grouplasso::unpenalized_fit(problem);
    out.lambda1_scores.clear();
    std::size_t best1 = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const double df = grouplasso::group_degrees_of_freedom(problem, groups, path[i].beta, unpenalized);
      const double score =
          lambda1_score(grouplasso::whitened_rss(problem, path[i].beta), df, n * q, n, config.criterion);
      out.lambda1_scores.push_back(score);
      if (score < out.lambda1_scores[best1]) best1 = i;
    }
    out.lambda1 = out.lambda1_grid[best1];
    beta = path[best1].beta;

    // Omega-step over the lambda2 grid at the selected beta
    const Matrix s = glasso::residual_covariance(stacked, beta);
    const double top = q > 1 ? (s - Matrix(s.diagonal().asDiagonal())).cwiseAbs().maxCoeff() : 0.0;
    out.lambda2_grid = log_grid(top, config.lambda2_grid_ratio, config.lambda2_grid_size);
    out.lambda2_scores.clear();
    std::size_t best2 = 0;
    Matrix warm;
    Matrix best_omega;
    for (std::size_t i = 0; i < out.lambda2_grid.size(); ++i) {
      const auto solved = glasso::solve({s, out.lambda2_grid[i]}, config.glasso, warm);
      warm = solved.model.omega;
      const double score = lambda2_score(s, warm, n, config.criterion);
      out.lambda2_scores.push_back(score);
      if (i == 0 || score < out.lambda2_scores[best2]) {
        best2 = i;
        best_omega = warm;
      }
    }
    out.lambda2 = out.lambda2_grid[best2];
    omega = best_omega;
  }

  out.fit = alternate_fit_from(stacked, out.lambda1, out.lambda2, config, beta, omega);
  return out;
}

FitResult select_p(const TimeSeriesPanel& panel, const FitConfig& config) {
  config.validate();
  const int max_p = *std::max_element(config.p_candidates.begin(), config.p_candidates.end());
  if (panel.length() <= max_p)
    throw DimensionError("panel length " + std::to_string(panel.length()) + " must exceed the largest lag order " +
                         std::to_string(max_p));
  std::vector<FitResult> fits(config.p_candidates.size());
  parallel_for(fits.size(), [&](std::size_t i) { fits[i] = select_lambdas(panel, config.p_candidates[i], config).fit; });
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    const auto key = std::make_tuple(fits[i].bic, fits[i].p, fits[i].lambda1, fits[i].lambda2);
    const auto incumbent = std::make_tuple(fits[best].bic, fits[best].p, fits[best].lambda1, fits[best].lambda2);
    if (key < incumbent) best = i;
  }
  return fits[best];
}

}  // namespace sparsevar::estimator
