#include "sparsevar/glasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "sparsevar/errors.hpp"
#include "sparsevar/kernels.hpp"

namespace sparsevar::glasso {

Matrix residual_covariance(const StackedDesign& stacked, const Vector& beta) {
  const Eigen::Index pq = stacked.x0.cols();
  if (beta.size() != pq * stacked.q) throw DimensionError("coefficient vector does not match the design");
  if (stacked.n() == 0) throw DimensionError("no residual rows");
  const Eigen::Map<const Matrix> b(beta.data(), pq, stacked.q);
  const Matrix residuals = stacked.responses - stacked.x0 * b;
  Matrix s = residuals.transpose() * residuals / stacked.n();
  return 0.5 * (s + s.transpose());
}

double objective(const Matrix& s, const Matrix& omega, double lambda2) {
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double off_diagonal = omega.cwiseAbs().sum() - omega.diagonal().cwiseAbs().sum();
  return (s.cwiseProduct(omega)).sum() - log_det + lambda2 * off_diagonal;
}

double kkt_violation(const Matrix& s, const Matrix& omega, double lambda2) {
  const Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Matrix w = llt.solve(Matrix::Identity(omega.rows(), omega.cols()));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index k = 0; k < omega.rows(); ++k) {
      const double gradient = s(k, j) - w(k, j);
      double violation = 0.0;
      if (k == j) {
        violation = std::fabs(gradient);
      } else if (omega(k, j) != 0.0) {
        violation = std::fabs(gradient + lambda2 * (omega(k, j) > 0.0 ? 1.0 : -1.0));
      } else {
        violation = std::max(0.0, std::fabs(gradient) - lambda2);
      }
      worst = std::max(worst, violation);
    }
  }
  return worst;
}

int free_parameters(const Matrix& omega) {
  int count = static_cast<int>(omega.rows());
  for (Eigen::Index j = 1; j < omega.cols(); ++j)
    for (Eigen::Index k = 0; k < j; ++k)
      if (omega(k, j) != 0.0) ++count;
  return count;
}

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Coordinate descent for min_x 0.5 x'Qx + c'x + lambda ||x||_1, warm-started
// from x. Returns false if the iteration cap was hit.
bool column_lasso(const Matrix& quad, const Vector& linear, double lambda, Vector& x, double tolerance,
                  int max_iter) {
  const Eigen::Index dim = x.size();
  Vector qx = quad * x;
  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double diag = quad(k, k);
      const double partial = linear(k) + qx(k) - diag * x(k);
      const double next = -soft_threshold(partial, lambda) / diag;
      const double delta = next - x(k);
      if (delta != 0.0) {
        x(k) = next;
        kernels::axpy(delta, std::span<const double>(quad.col(k).data(), static_cast<std::size_t>(dim)),
                      std::span<double>(qx.data(), static_cast<std::size_t>(dim)));
        change = std::max(change, std::fabs(delta));
      }
    }
    if (change < tolerance) return true;
  }
  return false;
}

std::vector<Eigen::Index> others(Eigen::Index dim, Eigen::Index j) {
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(dim - 1));
  for (Eigen::Index k = 0; k < dim; ++k)
    if (k != j) idx.push_back(k);
  return idx;
}

// Block coordinate descent converges linearly and slowly when S is badly
// conditioned. Newton's method on the diagonal and the nonzero off-diagonal
// entries (signs fixed) finishes the job; the result is used only if it stays
// positive definite, keeps every sign, satisfies the conditions on the zero
// entries and does not raise the objective.
constexpr Eigen::Index kMaxPolishVariables = 400;

bool newton_polish(const Matrix& s, double lambda, Matrix& omega, bool& stationary) {
  const Eigen::Index q = s.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> vars;
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (i == j || omega(i, j) != 0.0) vars.emplace_back(i, j);
  const auto m = static_cast<Eigen::Index>(vars.size());
  if (m > kMaxPolishVariables) return false;

  Matrix sign = Matrix::Zero(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < q; ++i)
      if (i != j && omega(i, j) != 0.0) sign(i, j) = omega(i, j) > 0.0 ? 1.0 : -1.0;

  stationary = false;
  Matrix current = omega;
  double f = objective(s, current, lambda);
  for (int it = 0; it < 50; ++it) {
    const Matrix w = Eigen::LLT<Matrix>(current).solve(Matrix::Identity(q, q));
    Vector grad(m);
    Matrix hess(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto [a, b] = vars[static_cast<std::size_t>(k)];
      grad(k) = a == b ? s(a, a) - w(a, a) : 2.0 * (s(a, b) - w(a, b) + lambda * sign(a, b));
      for (Eigen::Index l = 0; l <= k; ++l) {
        const auto [c, d] = vars[static_cast<std::size_t>(l)];
        // tr(W E_k W E_l) with E = e_a e_b' (+ e_b e_a' off the diagonal).
        double h = w(b, c) * w(d, a);
        if (a != b) h += w(a, c) * w(d, b);
        if (c != d) h += w(b, d) * w(c, a);
        if (a != b && c != d) h += w(a, d) * w(c, b);
        hess(k, l) = hess(l, k) = h;
      }
    }
    if (grad.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, current.cwiseAbs().maxCoeff())) {
      stationary = true;
      break;
    }
    const Eigen::LLT<Matrix> hllt(hess);
    if (hllt.info() != Eigen::Success) return false;
    const Vector step = -hllt.solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40 && !moved; ++ls, t *= 0.5) {
      Matrix trial = current;
      bool signs_kept = true;
      for (Eigen::Index k = 0; k < m; ++k) {
        const auto [a, b] = vars[static_cast<std::size_t>(k)];
        const double v = current(a, b) + t * step(k);
        if (a != b && v * sign(a, b) <= 0.0) signs_kept = false;
        trial(a, b) = trial(b, a) = v;
      }
      if (!signs_kept) continue;
      const double ft = objective(s, trial, lambda);
      if (ft <= f) {
        current = trial;
        moved = ft < f;
        f = ft;
        if (!moved) break;
      }
    }
    if (!moved) break;
  }
  if (Eigen::LLT<Matrix>(current).info() != Eigen::Success) return false;
  const Matrix w = Eigen::LLT<Matrix>(current).solve(Matrix::Identity(q, q));
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < q; ++i)
      if (i != j && current(i, j) == 0.0 && std::fabs(s(i, j) - w(i, j)) > lambda + 1e-12) return false;
  if (!(f <= objective(s, omega, lambda))) return false;
  omega = current;
  return true;
}

}  // namespace

GlassoResult solve(const PenalizedPrecisionProblem& problem, const GlassoOptions& options, const Matrix& warm_omega) {
  const Matrix& s = problem.s;
  const double lambda = problem.lambda2;
  const Eigen::Index q = s.rows();
  if (s.cols() != q || q == 0) throw DimensionError("covariance matrix must be square and nonempty");
  if (!(lambda >= 0.0)) throw ConfigError("lambda2 must be nonnegative");
  for (Eigen::Index k = 0; k < q; ++k) {
    if (!(s(k, k) > 0.0)) {
      std::ostringstream msg;
      msg << "residual variance of series " << k + 1 << " is " << s(k, k) << "; need a positive diagonal";
      throw DataError(msg.str());
    }
  }
  if (lambda == 0.0) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
      throw NumericalError("residual covariance is singular; use a positive lambda2 to obtain an invertible estimate");
    // Unpenalized: the maximizer is the inverse itself.
    Matrix inverse = llt.solve(Matrix::Identity(q, q));
    inverse = 0.5 * (inverse + inverse.transpose());
    GlassoResult result;
    result.converged = true;
    result.objective_trace.push_back(objective(s, inverse, 0.0));
    result.model = ErrorModel::from_omega(inverse);
    result.kkt_violation = kkt_violation(s, inverse, 0.0);
    return result;
  }

  Matrix omega;
  if (warm_omega.rows() == q && warm_omega.cols() == q && Eigen::LLT<Matrix>(warm_omega).info() == Eigen::Success) {
    omega = 0.5 * (warm_omega + warm_omega.transpose());
  } else {
    omega = s.diagonal().cwiseInverse().asDiagonal();
  }

  GlassoResult result;
  const double scale = std::max(1.0, omega.diagonal().cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    Matrix w = Eigen::LLT<Matrix>(omega).solve(Matrix::Identity(q, q));
    w = 0.5 * (w + w.transpose());
    double change = 0.0;
    for (Eigen::Index j = 0; j < q && q > 1; ++j) {
      const auto idx = others(q, j);
      const Eigen::Index m = q - 1;
      Matrix w11(m, m);
      Vector w12(m), s12(m), theta(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        w12(a) = w(idx[a], j);
        s12(a) = s(idx[a], j);
        theta(a) = omega(idx[a], j);
        for (Eigen::Index b = 0; b < m; ++b) w11(a, b) = w(idx[a], idx[b]);
      }
      // inverse of Omega_11 from the current inverse
      const Matrix inv11 = w11 - w12 * w12.transpose() / w(j, j);
      const double s22 = s(j, j);
      const Matrix quad = s22 * inv11;
      column_lasso(quad, s12, lambda, theta, options.inner_tolerance, options.max_inner);

      const Vector inv_theta = inv11 * theta;
      const double theta22 = 1.0 / s22 + theta.dot(inv_theta);
      change = std::max(change, std::fabs(theta22 - omega(j, j)));
      omega(j, j) = theta22;
      for (Eigen::Index a = 0; a < m; ++a) {
        change = std::max(change, std::fabs(theta(a) - omega(idx[a], j)));
        omega(idx[a], j) = theta(a);
        omega(j, idx[a]) = theta(a);
      }
      // Block inverse with Schur complement 1/s22.
      const Matrix w11_new = inv11 + s22 * inv_theta * inv_theta.transpose();
      for (Eigen::Index a = 0; a < m; ++a) {
        w(idx[a], j) = -s22 * inv_theta(a);
        w(j, idx[a]) = -s22 * inv_theta(a);
        for (Eigen::Index b = 0; b < m; ++b) w(idx[a], idx[b]) = w11_new(a, b);
      }
      w(j, j) = s22;
    }
    if (q == 1) omega(0, 0) = 1.0 / s(0, 0);
    result.sweeps = sweep + 1;
    result.objective_trace.push_back(objective(s, omega, lambda));
    if (change <= options.tolerance * scale) {
      result.converged = true;
      break;
    }
  }
  bool stationary = false;
  if (q > 1 && newton_polish(s, lambda, omega, stationary)) {
    result.objective_trace.push_back(objective(s, omega, lambda));
    result.converged = result.converged || stationary;
  }
  if (Eigen::LLT<Matrix>(omega).info() != Eigen::Success)
    throw NumericalError("precision estimate lost positive definiteness");
  result.model = ErrorModel::from_omega(omega);
  result.kkt_violation = kkt_violation(s, omega, lambda);
  return result;
}

}  // namespace sparsevar::glasso
