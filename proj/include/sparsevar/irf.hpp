#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/fit_result.hpp"

namespace sparsevar::irf {

// Generalized impulse responses for a set of impulses. responses[k](i, c) is
// the response of series i at horizon k to a shock in series impulses[c].
struct GirfResult {
  int horizon = 0;
  std::vector<int> impulses;
  std::vector<Matrix> responses;
  // Pointwise percentile bands, empty unless bootstrapped.
  std::vector<Matrix> lower;
  std::vector<Matrix> upper;
  double level = 0.0;
  int n_boot = 0;
  int dropped = 0;
  std::string warning;
  // Covariance of the stacked coefficient vector across bootstrap
  // replicates (diagonal only when requested).
  Matrix coefficient_covariance;

  bool has_bands() const { return !lower.empty(); }
  int series() const { return responses.empty() ? 0 : static_cast<int>(responses.front().rows()); }
  // Column of `impulse` in the response matrices; throws if absent.
  int column(int impulse) const;
  double value(int impulse, int response, int k) const;
};

// Phi_0 = I, Phi_k = sum_{i=1..min(k,p)} B_i Phi_{k-i}.
std::vector<Matrix> ma_coefficients(const VarCoefficients& coefficients, int horizon);

// Pesaran-Shin responses Phi_k Sigma e_j / sqrt(Sigma_jj), scaled by
// `shock` standard deviations.
GirfResult girf(const FitResult& fit, int impulse, int horizon = 10, double shock = 1.0);
GirfResult girf_all(const FitResult& fit, int horizon = 10, double shock = 1.0);

// Sum of |response| over horizons 1..lags, or 0..lags with include_impact.
double effect_size(const GirfResult& result, int impulse, int response, int lags = 10, bool include_impact = false);

// Estimates a model on a bootstrap panel with fixed tuning parameters.
using Refit = std::function<FitResult(const TimeSeriesPanel&)>;

enum class CovarianceKind { full, diagonal, none };

struct BootstrapOptions {
  int n_boot = 1000;
  int horizon = 10;
  std::uint64_t seed = 1;
  double level = 0.90;
  CovarianceKind covariance = CovarianceKind::full;
  int burn_in = 200;
  double shock = 1.0;
};

// Residual parametric bootstrap. Each replicate simulates a series of the
// panel's length from the fitted coefficients with N(0, Sigma) innovations,
// refits with `refit` and records the GIRFs to every impulse. Bands are
// type-7 percentiles at (1 - level)/2 and (1 + level)/2. Failed replicates
// are dropped and counted; a warning is set when more than 5% fail.
GirfResult bootstrap_bands(const FitResult& fit, const TimeSeriesPanel& panel, const Refit& refit,
                           const BootstrapOptions& options = {});

// Linear-interpolation percentile (type 7) of unsorted values.
double percentile(std::vector<double> values, double prob);

// CSV with columns impulse,response,horizon,value,lower,upper. Bands are
// left empty when absent. Series are labelled by `names` when given.
void write_csv(std::ostream& out, const GirfResult& result, const std::vector<std::string>& names = {});

}  // namespace sparsevar::irf
