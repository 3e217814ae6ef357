#pragma once

#include "sparsevar/fit_result.hpp"

namespace sparsevar::benchmarks {

// Minnesota prior: beta ~ N(prior_mean, V) with V diagonal. For equation i
// and lag l the prior variance of the coefficient on series j is
//   (tightness / l)^2                                   if j == i
//   (tightness * cross_weight / l)^2 * sigma_i^2 / sigma_j^2   otherwise
// where sigma_i^2 are univariate AR(p) residual variances.
struct MinnesotaHyper {
  double tightness = 0.1;
  double cross_weight = 0.5;
  Matrix prior_mean;  // pq x q design-matrix layout; empty means zero

  void validate() const;
};

// Normal-inverse-Wishart prior: B | Sigma ~ MN(prior_mean, Sigma (x) omega0),
// Sigma ~ iW(s0, nu0). Empty members take the defaults: zero prior mean,
// omega0 = diag((tightness / l)^2 / sigma_j^2), s0 = diag(sigma_i^2) and
// nu0 = q + 2.
struct NiwHyper {
  Matrix prior_mean;
  Matrix omega0;
  Matrix s0;
  double nu0 = 0.0;
  double tightness = 0.1;

  void validate(int q, int p) const;
};

// Equation-by-equation OLS on the lag matrix; Sigma is the residual
// covariance with denominator n. Throws DimensionError if n < pq and
// NumericalError if the Gram matrix is singular.
FitResult ls_fit(const TimeSeriesPanel& panel, int p);

// OLS, drop every regressor with |t| <= 1, refit on the survivors.
FitResult restricted_ls_1step(const TimeSeriesPanel& panel, int p);

// Backward elimination per equation: repeatedly remove the regressor whose
// removal lowers the equation BIC, n log(RSS/n) + k log n, the most; stop when
// no removal strictly lowers it.
FitResult restricted_ls_iterative(const TimeSeriesPanel& panel, int p);

// OLS residual variance (denominator n - p) of a univariate AR(p) per series.
Vector ar_residual_variances(const TimeSeriesPanel& panel, int p);

// Prior variances in design-matrix layout (pq x q).
Matrix minnesota_prior_variances(const Vector& ar_variances, int p, const MinnesotaHyper& hyper);

// Posterior mean of one regression y = X b + e, e ~ N(0, noise_var I), under
// b ~ N(prior_mean, diag(prior_var)).
Vector normal_posterior_mean(const Matrix& x, const Vector& y, const Vector& prior_mean, const Vector& prior_var,
                             double noise_var);

FitResult minnesota_fit(const TimeSeriesPanel& panel, int p, const MinnesotaHyper& hyper = {});

struct NiwPosterior {
  Matrix mean;       // B-bar, pq x q
  Matrix precision;  // omega-bar^{-1}
  Matrix scale;      // S-bar
  double dof = 0.0;  // nu-bar
};

NiwPosterior niw_posterior(const TimeSeriesPanel& panel, int p, const NiwHyper& hyper = {});
FitResult niw_fit(const TimeSeriesPanel& panel, int p, const NiwHyper& hyper = {});

}  // namespace sparsevar::benchmarks
