#include "sparsevar/irf.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "sparsevar/errors.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar::irf {

int GirfResult::column(int impulse) const {
  const auto it = std::find(impulses.begin(), impulses.end(), impulse);
  if (it == impulses.end()) throw DimensionError("impulse " + std::to_string(impulse) + " is not in the result");
  return static_cast<int>(it - impulses.begin());
}

double GirfResult::value(int impulse, int response, int k) const {
  if (k < 0 || k > horizon) throw DimensionError("horizon out of range");
  if (response < 0 || response >= series()) throw DimensionError("response index out of range");
  return responses[static_cast<std::size_t>(k)](response, column(impulse));
}

std::vector<Matrix> ma_coefficients(const VarCoefficients& coefficients, int horizon) {
  coefficients.validate();
  if (horizon < 0) throw DimensionError("horizon must be nonnegative");
  const int q = coefficients.q();
  const int p = coefficients.p();
  std::vector<Matrix> phi;
  phi.reserve(static_cast<std::size_t>(horizon) + 1);
  phi.push_back(Matrix::Identity(q, q));
  for (int k = 1; k <= horizon; ++k) {
    Matrix next = Matrix::Zero(q, q);
    for (int i = 1; i <= std::min(k, p); ++i)
      next.noalias() += coefficients.lags[static_cast<std::size_t>(i - 1)] * phi[static_cast<std::size_t>(k - i)];
    phi.push_back(std::move(next));
  }
  return phi;
}

namespace {

void check_sigma(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (sigma.rows() == 0 || llt.info() != Eigen::Success)
    throw NumericalError(
        "error covariance is not positive definite; use the sparse estimator, whose precision estimate is "
        "positive definite by construction");
}

GirfResult compute(const VarCoefficients& coefficients, const Matrix& sigma, const std::vector<int>& impulses,
                   int horizon, double shock) {
  const int q = coefficients.q();
  if (sigma.rows() != q || sigma.cols() != q) throw DimensionError("error covariance does not match the VAR");
  for (int j : impulses)
    if (j < 0 || j >= q) throw DimensionError("impulse index " + std::to_string(j) + " out of range");
  check_sigma(sigma);
  const auto phi = ma_coefficients(coefficients, horizon);
  Matrix shocks(q, static_cast<Eigen::Index>(impulses.size()));
  for (std::size_t c = 0; c < impulses.size(); ++c) {
    const int j = impulses[c];
    shocks.col(static_cast<Eigen::Index>(c)) = shock * sigma.col(j) / std::sqrt(sigma(j, j));
  }
  GirfResult out;
  out.horizon = horizon;
  out.impulses = impulses;
  out.responses.reserve(phi.size());
  for (const Matrix& m : phi) out.responses.push_back(m * shocks);
  return out;
}

std::vector<int> all_series(int q) {
  std::vector<int> out(static_cast<std::size_t>(q));
  for (int j = 0; j < q; ++j) out[static_cast<std::size_t>(j)] = j;
  return out;
}

}  // namespace

GirfResult girf(const FitResult& fit, int impulse, int horizon, double shock) {
  return compute(fit.coefficients, fit.error.sigma, {impulse}, horizon, shock);
}

GirfResult girf_all(const FitResult& fit, int horizon, double shock) {
  return compute(fit.coefficients, fit.error.sigma, all_series(fit.coefficients.q()), horizon, shock);
}

double effect_size(const GirfResult& result, int impulse, int response, int lags, bool include_impact) {
  if (result.horizon < lags) {
    throw DimensionError("effect size over " + std::to_string(lags) + " lags needs horizon >= " +
                         std::to_string(lags) + ", got " + std::to_string(result.horizon));
  }
  double total = 0.0;
  for (int k = include_impact ? 0 : 1; k <= lags; ++k) total += std::abs(result.value(impulse, response, k));
  return total;
}

double percentile(std::vector<double> values, double prob) {
  if (values.empty()) throw DataError("percentile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("percentile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

GirfResult bootstrap_bands(const FitResult& fit, const TimeSeriesPanel& panel, const Refit& refit,
                           const BootstrapOptions& options) {
  if (options.n_boot < 1) throw ConfigError("n_boot must be at least 1");
  if (!(options.level > 0.0 && options.level < 1.0)) throw ConfigError("band level must lie in (0, 1)");
  if (!refit) throw ConfigError("bootstrap needs a refit function");
  GirfResult out = girf_all(fit, options.horizon, options.shock);
  const int q = fit.coefficients.q();
  const int length = panel.length();

  struct Replicate {
    bool ok = false;
    std::vector<Matrix> responses;
    Vector coefficients;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(options.n_boot));
  parallel_for(reps.size(), [&](std::size_t b) {
    Replicate& rep = reps[b];
    try {
      const std::uint64_t seed = Rng::stream(options.seed, b).next_u64();
      const TimeSeriesPanel simulated = center(simulate_var(fit.coefficients, fit.error, length, seed, options.burn_in));
      const FitResult refitted = refit(simulated);
      if (refitted.coefficients.q() != q) return;
      rep.responses = girf_all(refitted, options.horizon, options.shock).responses;
      rep.coefficients = refitted.coefficients.stacked();
      rep.ok = rep.coefficients.allFinite();
    } catch (const std::exception&) {
      rep.ok = false;
    }
  });

  std::vector<const Replicate*> kept;
  for (const auto& rep : reps)
    if (rep.ok) kept.push_back(&rep);
  out.n_boot = options.n_boot;
  out.level = options.level;
  out.dropped = options.n_boot - static_cast<int>(kept.size());
  if (kept.empty()) throw NumericalError("every bootstrap replicate failed to estimate");
  if (out.dropped * 20 > options.n_boot) {
    out.warning = fmt::format("{} of {} bootstrap replicates failed and were dropped", out.dropped, options.n_boot);
  }

  const double lo = (1.0 - options.level) / 2.0;
  const double hi = (1.0 + options.level) / 2.0;
  const auto columns = static_cast<Eigen::Index>(out.impulses.size());
  std::vector<double> sample(kept.size());
  for (int k = 0; k <= options.horizon; ++k) {
    Matrix lower(q, columns), upper(q, columns);
    for (int i = 0; i < q; ++i) {
      for (Eigen::Index c = 0; c < columns; ++c) {
        for (std::size_t r = 0; r < kept.size(); ++r) sample[r] = kept[r]->responses[static_cast<std::size_t>(k)](i, c);
        lower(i, c) = percentile(sample, lo);
        upper(i, c) = percentile(sample, hi);
      }
    }
    out.lower.push_back(std::move(lower));
    out.upper.push_back(std::move(upper));
  }

  if (options.covariance != CovarianceKind::none) {
    const Eigen::Index dim = kept.front()->coefficients.size();
    Vector mean = Vector::Zero(dim);
    for (const auto* rep : kept) mean += rep->coefficients;
    mean /= static_cast<double>(kept.size());
    const double denom = kept.size() > 1 ? static_cast<double>(kept.size() - 1) : 1.0;
    if (options.covariance == CovarianceKind::full) {
      Matrix centered(dim, static_cast<Eigen::Index>(kept.size()));
      for (std::size_t r = 0; r < kept.size(); ++r) centered.col(static_cast<Eigen::Index>(r)) = kept[r]->coefficients - mean;
      out.coefficient_covariance = centered * centered.transpose() / denom;
    } else {
      Vector var = Vector::Zero(dim);
      for (const auto* rep : kept) var += (rep->coefficients - mean).cwiseAbs2();
      out.coefficient_covariance = Matrix((var / denom).asDiagonal());
    }
  }
  return out;
}

void write_csv(std::ostream& out, const GirfResult& result, const std::vector<std::string>& names) {
  const int q = result.series();
  auto label = [&](int s) {
    return names.size() == static_cast<std::size_t>(q) ? names[static_cast<std::size_t>(s)] : std::to_string(s);
  };
  out << "impulse,response,horizon,value,lower,upper\n";
  for (std::size_t c = 0; c < result.impulses.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    for (int i = 0; i < q; ++i) {
      for (int k = 0; k <= result.horizon; ++k) {
        const auto h = static_cast<std::size_t>(k);
        out << label(result.impulses[c]) << ',' << label(i) << ',' << k << ','
            << fmt::format("{}", result.responses[h](i, col)) << ',';
        if (result.has_bands())
          out << fmt::format("{},{}", result.lower[h](i, col), result.upper[h](i, col));
        else
          out << ',';
        out << '\n';
      }
    }
  }
}

}  // namespace sparsevar::irf
