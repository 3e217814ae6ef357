#include "sparsevar/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "sparsevar/errors.hpp"
#include "sparsevar/estimator.hpp"

namespace sparsevar::benchmarks {

namespace {

void check_ls_feasible(const StackedDesign& stacked) {
  const Eigen::Index pq = stacked.x0.cols();
  if (stacked.n() < pq) {
    throw DimensionError("least squares needs n >= pq: n = " + std::to_string(stacked.n()) +
                         ", pq = " + std::to_string(pq));
  }
}

// Inverse of X'X; throws when X'X is numerically singular.
Matrix gram_inverse(const Matrix& x) {
  const Matrix gram = x.transpose() * x;
  Eigen::LDLT<Matrix> ldlt(gram);
  const Vector d = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || d.size() == 0 || !(d.minCoeff() > 1e-12 * std::max(1.0, d.maxCoeff())))
    throw NumericalError("Gram matrix of the lag regressors is singular; the model is overparametrized");
  return ldlt.solve(Matrix::Identity(gram.rows(), gram.cols()));
}

FitResult finish(const StackedDesign& stacked, const Matrix& b, const char* method) {
  FitResult fit;
  fit.method = method;
  fit.p = stacked.p;
  fit.coefficients = VarCoefficients::from_design_matrix(b, stacked.q, stacked.p);
  const Matrix residuals = stacked.responses - stacked.x0 * b;
  const Matrix sigma = residuals.transpose() * residuals / stacked.n();
  fit.error = ErrorModel::from_sigma(sigma);
  const Eigen::Map<const Vector> beta(b.data(), b.size());
  fit.bic = estimator::information_criterion(stacked, beta, fit.error.omega);
  return fit;
}

// OLS on a subset of columns; coefficients outside the subset are zero.
Vector subset_ols(const Matrix& x, const Vector& y, const std::vector<Eigen::Index>& keep) {
  Vector out = Vector::Zero(x.cols());
  if (keep.empty()) return out;
  Matrix sub(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = x.col(keep[c]);
  const Vector coef = gram_inverse(sub) * (sub.transpose() * y);
  for (std::size_t c = 0; c < keep.size(); ++c) out(keep[c]) = coef(static_cast<Eigen::Index>(c));
  return out;
}

}  // namespace

void MinnesotaHyper::validate() const {
  if (!(tightness > 0.0) || !(cross_weight > 0.0)) throw ConfigError("Minnesota hyperparameters must be positive");
}

void NiwHyper::validate(int q, int p) const {
  const Eigen::Index pq = static_cast<Eigen::Index>(p) * q;
  if (prior_mean.size() != 0 && (prior_mean.rows() != pq || prior_mean.cols() != q))
    throw ConfigError("NIW prior mean must be pq x q");
  if (omega0.size() != 0) {
    if (omega0.rows() != pq || omega0.cols() != pq) throw ConfigError("NIW omega0 must be pq x pq");
    if (Eigen::LLT<Matrix>(omega0).info() != Eigen::Success) throw ConfigError("NIW omega0 must be positive definite");
  }
  if (s0.size() != 0) {
    if (s0.rows() != q || s0.cols() != q) throw ConfigError("NIW s0 must be q x q");
    if (Eigen::LLT<Matrix>(s0).info() != Eigen::Success) throw ConfigError("NIW s0 must be positive definite");
  }
  if (nu0 != 0.0 && !(nu0 > q + 1)) throw ConfigError("NIW nu0 must exceed q + 1");
  if (!(tightness > 0.0)) throw ConfigError("NIW tightness must be positive");
}

FitResult ls_fit(const TimeSeriesPanel& panel, int p) {
  const StackedDesign stacked = stack(panel, p);
  check_ls_feasible(stacked);
  const Matrix b = gram_inverse(stacked.x0) * (stacked.x0.transpose() * stacked.responses);
  return finish(stacked, b, "ls");
}

FitResult restricted_ls_1step(const TimeSeriesPanel& panel, int p) {
  const StackedDesign stacked = stack(panel, p);
  check_ls_feasible(stacked);
  const Matrix& x = stacked.x0;
  const Eigen::Index pq = x.cols();
  const Matrix inverse = gram_inverse(x);
  const Matrix full = inverse * (x.transpose() * stacked.responses);
  const int dof = std::max(1, stacked.n() - static_cast<int>(pq));
  Matrix b = Matrix::Zero(pq, stacked.q);
  for (int i = 0; i < stacked.q; ++i) {
    const Vector y = stacked.responses.col(i);
    const double rss = (y - x * full.col(i)).squaredNorm();
    const double noise = rss / dof;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < pq; ++c) {
      const double se = std::sqrt(noise * inverse(c, c));
      const double t = se > 0.0 ? full(c, i) / se : std::numeric_limits<double>::infinity();
      if (std::fabs(t) > 1.0) keep.push_back(c);
    }
    b.col(i) = static_cast<Eigen::Index>(keep.size()) == pq ? Vector(full.col(i)) : subset_ols(x, y, keep);
  }
  return finish(stacked, b, "rls1");
}

FitResult restricted_ls_iterative(const TimeSeriesPanel& panel, int p) {
  const StackedDesign stacked = stack(panel, p);
  check_ls_feasible(stacked);
  const Matrix& x = stacked.x0;
  const Eigen::Index pq = x.cols();
  const int n = stacked.n();
  const double log_n = std::log(static_cast<double>(n));
  const double floor = std::numeric_limits<double>::min();
  const Matrix full_inverse = gram_inverse(x);
  Matrix b = Matrix::Zero(pq, stacked.q);

  for (int i = 0; i < stacked.q; ++i) {
    const Vector y = stacked.responses.col(i);
    // Active regressors with the matching inverse Gram and OLS coefficients,
    // downdated in place as regressors are removed.
    std::vector<Eigen::Index> active(static_cast<std::size_t>(pq));
    for (Eigen::Index c = 0; c < pq; ++c) active[static_cast<std::size_t>(c)] = c;
    Matrix inverse = full_inverse;
    Vector coef = full_inverse * (x.transpose() * y);
    double rss = (y - x * coef).squaredNorm();

    while (!active.empty()) {
      const auto k = static_cast<Eigen::Index>(active.size());
      const double current = n * std::log(std::max(rss / n, floor)) + k * log_n;
      Eigen::Index drop = -1;
      double best = current;
      double best_rss = rss;
      for (Eigen::Index a = 0; a < k; ++a) {
        // Removing regressor a raises the RSS by coef_a^2 / inverse_aa.
        const double candidate_rss = rss + coef(a) * coef(a) / inverse(a, a);
        const double score = n * std::log(std::max(candidate_rss / n, floor)) + (k - 1) * log_n;
        if (score < best) {
          best = score;
          drop = a;
          best_rss = candidate_rss;
        }
      }
      if (drop < 0) break;
      const double pivot = inverse(drop, drop);
      const Vector column = inverse.col(drop);
      coef -= column * (coef(drop) / pivot);
      inverse -= column * column.transpose() / pivot;
      // remove row/column `drop`
      Matrix reduced(k - 1, k - 1);
      Vector reduced_coef(k - 1);
      for (Eigen::Index r = 0, rr = 0; r < k; ++r) {
        if (r == drop) continue;
        reduced_coef(rr) = coef(r);
        for (Eigen::Index c = 0, cc = 0; c < k; ++c) {
          if (c == drop) continue;
          reduced(rr, cc++) = inverse(r, c);
        }
        ++rr;
      }
      inverse = std::move(reduced);
      coef = std::move(reduced_coef);
      active.erase(active.begin() + drop);
      rss = best_rss;
    }
    // Refit the survivors directly to shed downdate rounding.
    b.col(i) = subset_ols(x, y, active);
  }
  return finish(stacked, b, "rlsit");
}

Vector ar_residual_variances(const TimeSeriesPanel& panel, int p) {
  const int q = panel.series();
  Vector out(q);
  for (int i = 0; i < q; ++i) {
    TimeSeriesPanel single(panel.data.col(i));
    const StackedDesign stacked = stack(single, p);
    if (stacked.n() <= p) throw DimensionError("series too short for a univariate AR(" + std::to_string(p) + ") fit");
    const Vector y = stacked.responses.col(0);
    const Vector coef = gram_inverse(stacked.x0) * (stacked.x0.transpose() * y);
    out(i) = (y - stacked.x0 * coef).squaredNorm() / (stacked.n() - p);
    if (!(out(i) > 0.0)) throw NumericalError("univariate AR residual variance of series " + std::to_string(i + 1) + " is zero");
  }
  return out;
}

Matrix minnesota_prior_variances(const Vector& ar_variances, int p, const MinnesotaHyper& hyper) {
  hyper.validate();
  const auto q = ar_variances.size();
  Matrix out(static_cast<Eigen::Index>(p) * q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (int l = 1; l <= p; ++l) {
      for (Eigen::Index j = 0; j < q; ++j) {
        const double base = hyper.tightness / l;
        out((l - 1) * q + j, i) = i == j ? base * base
                                         : base * base * hyper.cross_weight * hyper.cross_weight *
                                               ar_variances(i) / ar_variances(j);
      }
    }
  }
  return out;
}

Vector normal_posterior_mean(const Matrix& x, const Vector& y, const Vector& prior_mean, const Vector& prior_var,
                             double noise_var) {
  Matrix precision = x.transpose() * x / noise_var;
  precision.diagonal() += prior_var.cwiseInverse();
  const Vector rhs = prior_mean.cwiseQuotient(prior_var) + x.transpose() * y / noise_var;
  return precision.llt().solve(rhs);
}

FitResult minnesota_fit(const TimeSeriesPanel& panel, int p, const MinnesotaHyper& hyper) {
  hyper.validate();
  const StackedDesign stacked = stack(panel, p);
  const int q = stacked.q;
  const Eigen::Index pq = stacked.x0.cols();
  if (hyper.prior_mean.size() != 0 && (hyper.prior_mean.rows() != pq || hyper.prior_mean.cols() != q))
    throw ConfigError("Minnesota prior mean must be pq x q");
  const Vector variances = ar_residual_variances(panel, p);
  const Matrix prior_var = minnesota_prior_variances(variances, p, hyper);
  const Matrix prior_mean = hyper.prior_mean.size() == 0 ? Matrix::Zero(pq, q) : hyper.prior_mean;

  Matrix b(pq, q);
  for (int i = 0; i < q; ++i)
    b.col(i) = normal_posterior_mean(stacked.x0, stacked.responses.col(i), prior_mean.col(i), prior_var.col(i),
                                     variances(i));

  FitResult fit;
  fit.method = "minnesota";
  fit.p = p;
  fit.coefficients = VarCoefficients::from_design_matrix(b, q, p);
  fit.error = ErrorModel::from_sigma(variances.asDiagonal());
  const Eigen::Map<const Vector> beta(b.data(), b.size());
  fit.bic = estimator::information_criterion(stacked, beta, fit.error.omega);
  return fit;
}

NiwPosterior niw_posterior(const TimeSeriesPanel& panel, int p, const NiwHyper& hyper) {
  const StackedDesign stacked = stack(panel, p);
  const int q = stacked.q;
  const Eigen::Index pq = stacked.x0.cols();
  hyper.validate(q, p);

  Vector variances;
  if (hyper.omega0.size() == 0 || hyper.s0.size() == 0) variances = ar_residual_variances(panel, p);
  Matrix omega0_inv;
  if (hyper.omega0.size() == 0) {
    omega0_inv = Matrix::Zero(pq, pq);
    for (int l = 1; l <= p; ++l)
      for (int j = 0; j < q; ++j) {
        const double base = hyper.tightness / l;
        omega0_inv((l - 1) * q + j, (l - 1) * q + j) = variances(j) / (base * base);
      }
  } else {
    omega0_inv = hyper.omega0.llt().solve(Matrix::Identity(pq, pq));
  }
  const Matrix s0 = hyper.s0.size() == 0 ? Matrix(variances.asDiagonal()) : hyper.s0;
  const double nu0 = hyper.nu0 == 0.0 ? q + 2.0 : hyper.nu0;
  const Matrix b0 = hyper.prior_mean.size() == 0 ? Matrix::Zero(pq, q) : hyper.prior_mean;

  const Matrix& x = stacked.x0;
  const Matrix& y = stacked.responses;
  NiwPosterior post;
  post.precision = omega0_inv + x.transpose() * x;
  const Eigen::LLT<Matrix> llt(post.precision);
  if (llt.info() != Eigen::Success) throw NumericalError("NIW posterior precision is not positive definite");
  post.mean = llt.solve(omega0_inv * b0 + x.transpose() * y);
  post.scale = s0 + y.transpose() * y + b0.transpose() * omega0_inv * b0 -
               post.mean.transpose() * post.precision * post.mean;
  post.scale = 0.5 * (post.scale + post.scale.transpose());
  post.dof = nu0 + stacked.n();
  return post;
}

FitResult niw_fit(const TimeSeriesPanel& panel, int p, const NiwHyper& hyper) {
  const NiwPosterior post = niw_posterior(panel, p, hyper);
  const StackedDesign stacked = stack(panel, p);
  const int q = stacked.q;
  FitResult fit;
  fit.method = "niw";
  fit.p = p;
  fit.coefficients = VarCoefficients::from_design_matrix(post.mean, q, p);
  fit.error = ErrorModel::from_sigma(post.scale / (post.dof - q - 1));
  const Eigen::Map<const Vector> beta(post.mean.data(), post.mean.size());
  fit.bic = estimator::information_criterion(stacked, beta, fit.error.omega);
  return fit;
}

}  // namespace sparsevar::benchmarks
