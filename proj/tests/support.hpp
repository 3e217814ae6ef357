#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sparsevar/fit_result.hpp"
#include "sparsevar/grouplasso.hpp"
#include "sparsevar/rng.hpp"

namespace testing {

using sparsevar::Matrix;
using sparsevar::Vector;

inline Matrix random_matrix(sparsevar::Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

// Well-conditioned SPD matrix A A'/q + 0.5 I.
inline Matrix random_spd(sparsevar::Rng& rng, int q) {
  const Matrix a = random_matrix(rng, q, q);
  return a * a.transpose() / q + 0.5 * Matrix::Identity(q, q);
}

inline bool is_positive_definite(const Matrix& m) {
  if (!m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

// Largest increase between consecutive objective values; <= 0 means monotone.
inline double worst_increase(const std::vector<double>& trace) {
  double worst = -INFINITY;
  for (std::size_t t = 1; t < trace.size(); ++t) worst = std::max(worst, trace[t] - trace[t - 1]);
  return trace.size() < 2 ? 0.0 : worst;
}

inline bool trace_monotone(const std::vector<double>& trace, double slack = 1e-8) {
  for (std::size_t t = 1; t < trace.size(); ++t)
    if (trace[t] > trace[t - 1] + slack) return false;
  return true;
}

// Zero cells of the lag matrices coincide across lags.
inline bool group_structure_holds(const sparsevar::VarCoefficients& coefs) {
  for (int i = 0; i < coefs.q(); ++i)
    for (int k = 0; k < coefs.q(); ++k) {
      const bool zero = coefs.lags.front()(i, k) == 0.0;
      for (const auto& lag : coefs.lags)
        if ((lag(i, k) == 0.0) != zero) return false;
    }
  return true;
}

// Group-lasso KKT violation computed from the materialized design, without
// going through the solver's factored representation.
inline double dense_kkt(const sparsevar::grouplasso::WhitenedProblem& problem,
                        const sparsevar::grouplasso::GroupStructure& groups, const Vector& beta, double lambda1) {
  const Matrix x = problem.dense_design();
  const Vector r = problem.y_tilde - x * beta;
  const double n = problem.n();
  double worst = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) {
    const auto idx = groups.indices(g);
    const int p = groups.group_size();
    Matrix weight = Matrix::Identity(p, p);
    if (!problem.weights.empty()) weight = problem.weights[static_cast<std::size_t>(groups.predictor(g))];
    Vector grad(p), b(p);
    for (int l = 0; l < p; ++l) {
      grad(l) = (2.0 / n) * x.col(idx[static_cast<std::size_t>(l)]).dot(r);
      b(l) = beta(idx[static_cast<std::size_t>(l)]);
    }
    const Vector c = weight.transpose().triangularView<Eigen::Lower>().solve(grad);
    const Vector gamma = weight * b;
    const double norm = gamma.norm();
    const double v = norm == 0.0 ? std::max(0.0, c.norm() - lambda1) : (c - lambda1 * gamma / norm).norm();
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace testing
