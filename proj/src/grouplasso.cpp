#include "sparsevar/grouplasso.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "sparsevar/errors.hpp"
#include "sparsevar/kernels.hpp"

namespace sparsevar::grouplasso {

std::vector<int> GroupStructure::indices(int g) const {
  std::vector<int> out(static_cast<std::size_t>(p));
  for (int l = 0; l < p; ++l) out[static_cast<std::size_t>(l)] = index(g, l);
  return out;
}

Matrix upper_cholesky(const Matrix& spd) {
  if (spd.rows() != spd.cols()) throw DimensionError("Cholesky factorization needs a square matrix");
  const Eigen::Index dim = spd.rows();
  Matrix u = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    double pivot = spd(j, j);
    for (Eigen::Index m = 0; m < j; ++m) pivot -= u(m, j) * u(m, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw NumericalError("precision matrix is not positive definite: leading minor of order " +
                           std::to_string(j + 1) + " is not positive");
    }
    u(j, j) = std::sqrt(pivot);
    for (Eigen::Index c = j + 1; c < dim; ++c) {
      double value = spd(j, c);
      for (Eigen::Index m = 0; m < j; ++m) value -= u(m, j) * u(m, c);
      u(j, c) = value / u(j, j);
    }
  }
  return u;
}

std::vector<Matrix> penalty_weights(const Matrix& x0, int q, int p, GroupPenalty penalty) {
  std::vector<Matrix> out;
  if (penalty == GroupPenalty::unweighted) return out;
  const double n = static_cast<double>(x0.rows());
  out.reserve(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) {
    Matrix block(p, p);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) block(a, b) = x0.col(a * q + k).dot(x0.col(b * q + k)) / n;
    Eigen::LLT<Matrix> llt(block);
    bool usable = n > 0.0 && llt.info() == Eigen::Success;
    Matrix r;
    if (usable) {
      r = llt.matrixU();
      const Vector d = r.diagonal().cwiseAbs();
      usable = d.minCoeff() > 1e-10 * std::max(1.0, d.maxCoeff());
    }
    out.push_back(usable ? r : Matrix::Identity(p, p));
  }
  return out;
}

WhitenedProblem whiten(const StackedDesign& stacked, const Matrix& omega, GroupPenalty penalty) {
  if (omega.rows() != stacked.q || omega.cols() != stacked.q)
    throw DimensionError("precision matrix does not match the number of equations");
  WhitenedProblem out;
  out.q = stacked.q;
  out.p = stacked.p;
  out.factor = upper_cholesky(omega);
  out.x0 = stacked.x0;
  out.weights = penalty_weights(stacked.x0, stacked.q, stacked.p, penalty);
  // (U (x) I_n) vec(Y) = vec(Y U')
  const Matrix y_tilde = stacked.responses * out.factor.transpose();
  out.y_tilde = Eigen::Map<const Vector>(y_tilde.data(), y_tilde.size());
  return out;
}

Vector WhitenedProblem::apply(const Vector& beta) const {
  const Eigen::Map<const Matrix> b(beta.data(), x0.cols(), q);
  const Matrix fitted = x0 * b * factor.transpose();
  return Eigen::Map<const Vector>(fitted.data(), fitted.size());
}

Vector WhitenedProblem::apply_transpose(const Vector& v) const {
  const Eigen::Map<const Matrix> block(v.data(), n(), q);
  const Matrix out = x0.transpose() * block * factor;
  return Eigen::Map<const Vector>(out.data(), out.size());
}

Matrix WhitenedProblem::dense_design() const {
  const Eigen::Index rows = static_cast<Eigen::Index>(n()) * q;
  const Eigen::Index pq = x0.cols();
  Matrix out = Matrix::Zero(rows, pq * q);
  for (int m = 0; m < q; ++m)
    for (int i = 0; i < q; ++i)
      if (factor(m, i) != 0.0) out.block(static_cast<Eigen::Index>(m) * n(), i * pq, n(), pq) = factor(m, i) * x0;
  return out;
}

double whitened_rss(const WhitenedProblem& problem, const Vector& beta) {
  return (problem.y_tilde - problem.apply(beta)).squaredNorm();
}

namespace {

Vector gather(const GroupStructure& groups, const Vector& v, int g) {
  Vector out(groups.p);
  for (int l = 0; l < groups.p; ++l) out(l) = v(groups.index(g, l));
  return out;
}

}  // namespace

double group_norm(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta, int g) {
  const Vector b = gather(groups, beta, g);
  if (problem.weights.empty()) return b.norm();
  const Matrix& r = problem.weights[static_cast<std::size_t>(groups.predictor(g))];
  return (r.triangularView<Eigen::Upper>() * b).norm();
}

double objective(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta, double lambda1) {
  double penalty = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) penalty += group_norm(problem, groups, beta, g);
  return whitened_rss(problem, beta) / problem.n() + lambda1 * penalty;
}

int active_group_count(const GroupStructure& groups, const Vector& beta) {
  int active = 0;
  for (int g = 0; g < groups.group_count(); ++g) {
    for (int l = 0; l < groups.p; ++l) {
      if (beta(groups.index(g, l)) != 0.0) {
        ++active;
        break;
      }
    }
  }
  return active;
}

Vector unpenalized_fit(const WhitenedProblem& problem) {
  // Y~ = Y U', so Y' = U^{-1} Y~'
  const Matrix y_tilde_t = Eigen::Map<const Matrix>(problem.y_tilde.data(), problem.n(), problem.q).transpose();
  const Matrix responses = problem.factor.triangularView<Eigen::Upper>().solve(y_tilde_t).transpose();
  const Matrix b = problem.x0.completeOrthogonalDecomposition().solve(responses);
  return Eigen::Map<const Vector>(b.data(), b.size());
}

double group_degrees_of_freedom(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta,
                                const Vector& unpenalized) {
  double df = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) {
    const double norm = group_norm(problem, groups, beta, g);
    if (norm == 0.0) continue;
    const double reference = group_norm(problem, groups, unpenalized, g);
    df += 1.0;
    if (reference > 0.0) df += norm / reference * (groups.p - 1);
  }
  return df;
}

namespace {

// R^{-T} c for the weight of group g.
Vector to_weighted(const WhitenedProblem& problem, const GroupStructure& groups, int g, const Vector& c) {
  if (problem.weights.empty()) return c;
  const Matrix& r = problem.weights[static_cast<std::size_t>(groups.predictor(g))];
  return r.transpose().triangularView<Eigen::Lower>().solve(c);
}

}  // namespace

double lambda1_max(const WhitenedProblem& problem, const GroupStructure& groups) {
  const Vector correlation = problem.apply_transpose(problem.y_tilde) * (2.0 / problem.n());
  double best = 0.0;
  for (int g = 0; g < groups.group_count(); ++g)
    best = std::max(best, to_weighted(problem, groups, g, gather(groups, correlation, g)).norm());
  return best;
}

double kkt_violation(const WhitenedProblem& problem, const GroupStructure& groups, const Vector& beta,
                     double lambda1) {
  const Vector residual = problem.y_tilde - problem.apply(beta);
  const Vector correlation = problem.apply_transpose(residual) * (2.0 / problem.n());
  double worst = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) {
    const Vector c = to_weighted(problem, groups, g, gather(groups, correlation, g));
    Vector gamma = gather(groups, beta, g);
    if (!problem.weights.empty())
      gamma = problem.weights[static_cast<std::size_t>(groups.predictor(g))].triangularView<Eigen::Upper>() * gamma;
    const double norm_gamma = gamma.norm();
    const double violation =
        norm_gamma == 0.0 ? std::max(0.0, c.norm() - lambda1) : (c - lambda1 * gamma / norm_gamma).norm();
    worst = std::max(worst, violation);
  }
  return worst;
}

namespace {

// Block coordinate descent state. The residual E = Y - x0 B and W = E Omega
// are kept as n x q matrices. The whitened residual is E U', so the smooth
// part is sum(E .* W) / n and its gradient for group (i, k) is
// -(2/n) x0_k' W[:, i]. A change d in group (i, k) moves E[:, i] by -x0_k d
// and every W[:, j] by -Omega(i, j) x0_k d.
class Solver {
 public:
  Solver(const WhitenedProblem& problem, const GroupStructure& groups, const GroupLassoOptions& options)
      : problem_(problem), groups_(groups), options_(options) {
    n_ = problem.n();
    q_ = problem.q;
    p_ = problem.p;
    scale_ = 2.0 / n_;
    const Matrix gram = problem.x0.transpose() * problem.x0;
    blocks_.resize(static_cast<std::size_t>(q_));
    for (int k = 0; k < q_; ++k) {
      Block& block = blocks_[static_cast<std::size_t>(k)];
      Matrix g(p_, p_);
      for (int a = 0; a < p_; ++a)
        for (int b = 0; b < p_; ++b) g(a, b) = gram(a * q_ + k, b * q_ + k);
      block.weighted = !problem.weights.empty();
      if (block.weighted) {
        block.weight = problem.weights[static_cast<std::size_t>(k)];
        // R^{-T} G R^{-1}
        const Matrix left = block.weight.transpose().triangularView<Eigen::Lower>().solve(g);
        block.gram = block.weight.transpose().triangularView<Eigen::Lower>().solve(left.transpose());
        block.gram = 0.5 * (block.gram + block.gram.transpose()).eval();
      } else {
        block.gram = g;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(block.gram, Eigen::EigenvaluesOnly);
      block.max_eigenvalue = eig.eigenvalues().maxCoeff();
      const double diag0 = block.gram(0, 0);
      const double off = (block.gram - Matrix(block.gram.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
      const double spread = (block.gram.diagonal().array() - diag0).abs().maxCoeff();
      block.orthogonal = off <= 1e-10 * std::max(1.0, diag0) && spread <= 1e-10 * std::max(1.0, diag0);
    }
    omega_ = problem.factor.transpose() * problem.factor;
    omega_diag_ = omega_.diagonal();
    for (Vector* v : {&beta_old_, &s_, &gamma_, &next_, &z_, &delta_}) v->resize(p_);
  }

  GroupLassoResult run(double lambda1, const Vector& warm_start) {
    lambda1_ = lambda1;
    GroupLassoResult result;
    const int dim = p_ * q_ * q_;
    beta_ = warm_start.size() == dim ? warm_start : Vector::Zero(dim);
    norms_.resize(static_cast<std::size_t>(groups_.group_count()));
    for (int g = 0; g < groups_.group_count(); ++g)
      norms_[static_cast<std::size_t>(g)] = is_active(g) ? group_norm(problem_, groups_, beta_, g) : 0.0;
    // Y = Y~ U^{-T}
    const Matrix y_tilde_t = Eigen::Map<const Matrix>(problem_.y_tilde.data(), n_, q_).transpose();
    const Matrix responses = problem_.factor.triangularView<Eigen::Upper>().solve(y_tilde_t).transpose();
    const Eigen::Map<const Matrix> b(beta_.data(), p_ * q_, q_);
    residual_ = responses - problem_.x0 * b;
    weighted_ = residual_ * omega_;

    std::vector<int> active;
    int sweeps = 0;
    while (sweeps < options_.max_sweeps) {
      double change = sweep_all(active);
      ++sweeps;
      result.objective_trace.push_back(current_objective());
      if (change < options_.tolerance) {
        const double kkt = kkt_violation(problem_, groups_, beta_, lambda1_);
        if (kkt <= options_.kkt_tolerance) {
          result.converged = true;
          result.kkt_violation = kkt;
          break;
        }
      }
      // Iterate on the active set until it settles, then re-check all groups.
      while (sweeps < options_.max_sweeps && !active.empty()) {
        change = sweep_active(active);
        ++sweeps;
        result.objective_trace.push_back(current_objective());
        if (change < options_.tolerance) break;
      }
    }
    if (!result.converged) result.kkt_violation = kkt_violation(problem_, groups_, beta_, lambda1_);
    result.sweeps = sweeps;
    result.beta = beta_;
    result.active_groups = active_group_count(groups_, beta_);
    return result;
  }

 private:
  // Coordinates gamma = R beta for the group; gram is the Gram block in
  // those coordinates, R^{-T} x0_k' x0_k R^{-1}.
  struct Block {
    Matrix weight;
    Matrix gram;
    double max_eigenvalue = 0.0;
    bool orthogonal = false;
    bool weighted = false;
  };

  double sweep_all(std::vector<int>& active) {
    active.clear();
    double change = 0.0;
    for (int g = 0; g < groups_.group_count(); ++g) {
      change = std::max(change, update_group(g));
      if (is_active(g)) active.push_back(g);
    }
    return change;
  }

  double sweep_active(const std::vector<int>& active) {
    double change = 0.0;
    for (int g : active) change = std::max(change, update_group(g));
    return change;
  }

  bool is_active(int g) const {
    for (int l = 0; l < p_; ++l)
      if (beta_(groups_.index(g, l)) != 0.0) return true;
    return false;
  }

  double current_objective() const {
    double penalty = 0.0;
    for (double norm : norms_) penalty += norm;
    return residual_.cwiseProduct(weighted_).sum() / n_ + lambda1_ * penalty;
  }

  // Exact (or majorized, iterated to convergence) minimization over one
  // group. Returns the largest absolute coefficient change.
  double update_group(int g) {
    const int i = groups_.equation(g);
    const int k = groups_.predictor(g);
    const Block& block = blocks_[static_cast<std::size_t>(k)];
    const std::span<const double> gradient(weighted_.col(i).data(), static_cast<std::size_t>(n_));
    for (int l = 0; l < p_; ++l) {
      beta_old_(l) = beta_(groups_.index(g, l));
      const double* column = problem_.x0.col(l * q_ + k).data();
      s_(l) = scale_ * kernels::dot(std::span<const double>(column, n_), gradient);
    }
    // Work in gamma = R beta. Block Hessian of the smooth part:
    // (2/n) Omega_ii R^{-T} x0_k' x0_k R^{-1}.
    const double curvature = scale_ * omega_diag_(i);
    const bool was_zero = beta_old_.isZero(0.0);
    gamma_ = beta_old_;
    if (block.weighted) {
      block.weight.transpose().triangularView<Eigen::Lower>().solveInPlace(s_);
      gamma_ = block.weight.triangularView<Eigen::Upper>() * beta_old_;
    }
    if (!was_zero) s_.noalias() += curvature * (block.gram * gamma_);

    next_.setZero();
    const double s_norm = s_.norm();
    // Rounding must not keep a group alive exactly at its threshold.
    if (s_norm > lambda1_ * (1.0 + 1e-12) && curvature > 0.0 && block.max_eigenvalue > 0.0) {
      if (block.orthogonal) {
        next_ = ((1.0 - lambda1_ / s_norm) / (curvature * block.gram(0, 0))) * s_;
      } else {
        // Proximal steps on the majorizer with curvature L = c * lambda_max.
        const double lipschitz = curvature * block.max_eigenvalue;
        if (was_zero)
          next_ = ((1.0 - lambda1_ / s_norm) / lipschitz) * s_;
        else
          next_ = gamma_;
        for (int it = 0; it < options_.max_inner; ++it) {
          z_.noalias() = block.gram * next_;
          z_ = next_ - (curvature * z_ - s_) / lipschitz;
          const double z_norm = z_.norm();
          const double shrink = z_norm > 0.0 ? std::max(0.0, 1.0 - lambda1_ / (lipschitz * z_norm)) : 0.0;
          z_ *= shrink;
          const double delta = (z_ - next_).cwiseAbs().maxCoeff();
          next_.swap(z_);
          if (delta < options_.inner_tolerance) break;
        }
      }
    }

    norms_[static_cast<std::size_t>(g)] = next_.norm();
    if (block.weighted) block.weight.triangularView<Eigen::Upper>().solveInPlace(next_);
    delta_ = next_ - beta_old_;
    const double change = delta_.cwiseAbs().maxCoeff();
    if (change == 0.0) return 0.0;
    for (int l = 0; l < p_; ++l) beta_(groups_.index(g, l)) = next_(l);
    // E[:, i] -= x0_k delta and W[:, j] -= Omega(i, j) x0_k delta
    for (int l = 0; l < p_; ++l) {
      if (delta_(l) == 0.0) continue;
      const std::span<const double> column(problem_.x0.col(l * q_ + k).data(), static_cast<std::size_t>(n_));
      kernels::axpy(-delta_(l), column, std::span<double>(residual_.col(i).data(), n_));
      for (int j = 0; j < q_; ++j) {
        if (omega_(i, j) == 0.0) continue;
        kernels::axpy(-omega_(i, j) * delta_(l), column, std::span<double>(weighted_.col(j).data(), n_));
      }
    }
    return change;
  }

  const WhitenedProblem& problem_;
  const GroupStructure& groups_;
  double lambda1_ = 0.0;
  GroupLassoOptions options_;
  int n_ = 0, q_ = 0, p_ = 0;
  double scale_ = 0.0;
  std::vector<Block> blocks_;
  Matrix omega_;
  Vector omega_diag_;
  Vector beta_;
  Matrix residual_;
  Matrix weighted_;
  // Weighted norm ||R_g beta_g|| of every group.
  std::vector<double> norms_;
  Vector beta_old_, s_, gamma_, next_, z_, delta_;
};

}  // namespace

GroupLassoResult solve(const WhitenedProblem& problem, const GroupStructure& groups, double lambda1,
                       const GroupLassoOptions& options, const Vector& warm_start) {
  if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 must be nonnegative");
  if (groups.q != problem.q || groups.p != problem.p) throw DimensionError("group structure does not match problem");
  if (problem.n() == 0) throw DimensionError("whitened problem has no observations");
  Solver solver(problem, groups, options);
  return solver.run(lambda1, warm_start);
}

std::vector<GroupLassoResult> solve_path(const WhitenedProblem& problem, const GroupStructure& groups,
                                         const std::vector<double>& lambdas, const GroupLassoOptions& options) {
  if (groups.q != problem.q || groups.p != problem.p) throw DimensionError("group structure does not match problem");
  if (problem.n() == 0) throw DimensionError("whitened problem has no observations");
  std::vector<GroupLassoResult> out;
  out.reserve(lambdas.size());
  Solver solver(problem, groups, options);
  Vector warm;
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda1 must be nonnegative");
    out.push_back(solver.run(lambda, warm));
    warm = out.back().beta;
  }
  return out;
}

}  // namespace sparsevar::grouplasso
