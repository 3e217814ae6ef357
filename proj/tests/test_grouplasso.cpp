#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "sparsevar/errors.hpp"
#include "sparsevar/grouplasso.hpp"
#include "support.hpp"

using namespace sparsevar;
using namespace sparsevar::grouplasso;

namespace {

StackedDesign random_design(Rng& rng, int n, int q, int p) {
  StackedDesign s;
  s.q = q;
  s.p = p;
  s.x0 = testing::random_matrix(rng, n, p * q);
  // Correlate the lags of each series so the penalty weights are not trivial.
  for (int l = 1; l < p; ++l) s.x0.middleCols(l * q, q) += 0.5 * s.x0.leftCols(q);
  Matrix b = 0.3 * testing::random_matrix(rng, p * q, q);
  b.row(0).setZero();
  s.responses = s.x0 * b + testing::random_matrix(rng, n, q);
  return s;
}

// (X' W X)^{-1} X' W y with X = I (x) x0 and W = Omega (x) I built densely.
Vector dense_gls(const StackedDesign& s, const Matrix& omega) {
  const Matrix x = Eigen::kroneckerProduct(Matrix::Identity(s.q, s.q), s.x0);
  const Matrix w = Eigen::kroneckerProduct(omega, Matrix::Identity(s.n(), s.n()));
  const Vector y = s.y();
  return (x.transpose() * w * x).ldlt().solve(x.transpose() * w * y);
}

}  // namespace

TEST_SUITE("grouplasso") {
  TEST_CASE("group indices follow the stacked layout") {
    const auto groups = GroupStructure::for_var(3, 2);
    CHECK(groups.group_count() == 9);
    // Equation 1, predictor 2: indices 1*6 + l*3 + 2.
    CHECK(groups.indices(5) == std::vector<int>{8, 11});
    CHECK(groups.equation(5) == 1);
    CHECK(groups.predictor(5) == 2);
  }

  TEST_CASE("identity precision leaves the problem unchanged") {
    Rng rng(1);
    const auto s = random_design(rng, 30, 2, 2);
    const auto w = whiten(s, Matrix::Identity(2, 2));
    CHECK((w.y_tilde - s.y()).norm() < 1e-14);
    const Matrix x = Eigen::kroneckerProduct(Matrix::Identity(2, 2), s.x0);
    CHECK((w.dense_design() - x).norm() < 1e-14);
  }

  TEST_CASE("whitening reproduces the Kronecker weighted inner products") {
    Rng rng(2);
    const auto s = random_design(rng, 25, 2, 1);
    Matrix omega(2, 2);
    omega << 2, 1, 1, 2;
    const auto w = whiten(s, omega);
    const Matrix u = w.factor;
    CHECK((u.transpose() * u - omega).norm() < 1e-12);
    const Matrix kron_w = Eigen::kroneckerProduct(omega, Matrix::Identity(25, 25));
    const Vector y = s.y();
    CHECK(w.y_tilde.squaredNorm() == doctest::Approx(y.dot(kron_w * y)).epsilon(1e-12));
    const Matrix x = Eigen::kroneckerProduct(Matrix::Identity(2, 2), s.x0);
    const Matrix xt = w.dense_design();
    CHECK((xt.transpose() * xt - x.transpose() * kron_w * x).norm() < 1e-9);
    const Vector beta = Vector::LinSpaced(4, -1, 1);
    CHECK((w.apply(beta) - xt * beta).norm() < 1e-12);
    const Vector v = Vector::LinSpaced(50, 0, 2);
    CHECK((w.apply_transpose(v) - xt.transpose() * v).norm() < 1e-12);
  }

  TEST_CASE("upper cholesky rejects indefinite input") {
    Matrix m(2, 2);
    m << 1, 2, 2, 1;
    CHECK_THROWS_AS(upper_cholesky(m), NumericalError);
  }

  TEST_CASE("lambda1 = 0 equals generalized least squares") {
    for (const auto penalty : {GroupPenalty::standardized, GroupPenalty::unweighted}) {
      for (int inst = 0; inst < 5; ++inst) {
        Rng rng(100 + static_cast<std::uint64_t>(inst));
        const int q = 1 + inst % 3, p = 1 + inst % 2;
        const auto s = random_design(rng, 60, q, p);
        const Matrix omega = testing::random_spd(rng, q);
        const auto w = whiten(s, omega, penalty);
        const auto groups = GroupStructure::for_var(q, p);
        const auto result = solve(w, groups, 0.0);
        CHECK(result.converged);
        CHECK((result.beta - dense_gls(s, omega)).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((unpenalized_fit(w) - dense_gls(s, omega)).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }

  TEST_CASE("orthonormal design gives group soft thresholding") {
    Rng rng(3);
    const int n = 40, q = 2, p = 2;
    StackedDesign s;
    s.q = q;
    s.p = p;
    const Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(rng, n, p * q));
    s.x0 = qr.householderQ() * Matrix::Identity(n, p * q) * std::sqrt(double(n));
    s.responses = s.x0 * testing::random_matrix(rng, p * q, q) * 0.3 + testing::random_matrix(rng, n, q);
    for (const auto penalty : {GroupPenalty::unweighted, GroupPenalty::standardized}) {
      const auto w = whiten(s, Matrix::Identity(q, q), penalty);
      const auto groups = GroupStructure::for_var(q, p);
      const Vector ls = w.apply_transpose(w.y_tilde) / n;
      const double lambda = 0.4;
      const auto result = solve(w, groups, lambda);
      for (int g = 0; g < groups.group_count(); ++g) {
        const auto idx = groups.indices(g);
        Vector b(p);
        for (int l = 0; l < p; ++l) b(l) = ls(idx[l]);
        const double shrink = std::max(0.0, 1.0 - lambda / (2.0 * b.norm()));
        for (int l = 0; l < p; ++l) CHECK(result.beta(idx[l]) == doctest::Approx(shrink * b(l)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("lambda1_max is the exact zero threshold") {
    Rng rng(4);
    const auto s = random_design(rng, 60, 3, 2);
    const auto w = whiten(s, testing::random_spd(rng, 3));
    const auto groups = GroupStructure::for_var(3, 2);
    const double top = lambda1_max(w, groups);
    CHECK(top > 0.0);
    for (const double scale : {1.0, 1.5, 10.0}) {
      const auto result = solve(w, groups, top * scale);
      CHECK(result.beta.cwiseAbs().maxCoeff() == 0.0);
      CHECK(result.active_groups == 0);
    }
    const auto below = solve(w, groups, top * 0.95);
    CHECK(below.active_groups >= 1);
  }

  TEST_CASE("path solutions satisfy KKT, keep group structure and descend") {
    for (int inst = 0; inst < 4; ++inst) {
      Rng rng(200 + static_cast<std::uint64_t>(inst));
      const int q = 2 + inst % 2, p = 1 + inst % 2;
      const auto s = random_design(rng, 60, q, p);
      const auto w = whiten(s, testing::random_spd(rng, q));
      const auto groups = GroupStructure::for_var(q, p);
      std::vector<double> grid;
      const double top = lambda1_max(w, groups);
      for (int k = 0; k < 8; ++k) grid.push_back(top * std::pow(0.5, k));
      const auto path = solve_path(w, groups, grid);
      REQUIRE(path.size() == grid.size());
      for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& r = path[k];
        CHECK(r.converged);
        CHECK(testing::dense_kkt(w, groups, r.beta, grid[k]) <= 1e-5);
        CHECK(std::abs(kkt_violation(w, groups, r.beta, grid[k]) - testing::dense_kkt(w, groups, r.beta, grid[k])) < 1e-9);
        CHECK(testing::trace_monotone(r.objective_trace, 1e-12));
        CHECK(testing::group_structure_holds(VarCoefficients::from_stacked(r.beta, q, p)));
        CHECK(r.active_groups == active_group_count(groups, r.beta));
      }
    }
  }

  TEST_CASE("objective and residual agree with dense evaluation") {
    Rng rng(5);
    const auto s = random_design(rng, 30, 2, 2);
    const auto w = whiten(s, testing::random_spd(rng, 2), GroupPenalty::unweighted);
    const auto groups = GroupStructure::for_var(2, 2);
    const Vector beta = Vector::LinSpaced(8, -0.5, 0.5);
    const double rss = (w.y_tilde - w.dense_design() * beta).squaredNorm();
    CHECK(whitened_rss(w, beta) == doctest::Approx(rss));
    double pen = 0.0;
    for (int g = 0; g < 4; ++g) pen += group_norm(w, groups, beta, g);
    CHECK(objective(w, groups, beta, 0.3) == doctest::Approx(rss / 30 + 0.3 * pen));
  }

  TEST_CASE("degrees of freedom interpolate between zero and the least squares count") {
    Rng rng(6);
    const auto s = random_design(rng, 60, 2, 2);
    const auto w = whiten(s, Matrix::Identity(2, 2));
    const auto groups = GroupStructure::for_var(2, 2);
    const Vector ls = unpenalized_fit(w);
    CHECK(group_degrees_of_freedom(w, groups, ls, ls) == doctest::Approx(8.0));
    CHECK(group_degrees_of_freedom(w, groups, Vector::Zero(8), ls) == 0.0);
  }

  TEST_CASE("penalty weights standardize each series' lag block") {
    Rng rng(7);
    const auto s = random_design(rng, 50, 2, 2);
    const auto weights = penalty_weights(s.x0, 2, 2, GroupPenalty::standardized);
    REQUIRE(weights.size() == 2);
    for (int k = 0; k < 2; ++k) {
      Matrix block(50, 2);
      block << s.x0.col(k), s.x0.col(2 + k);
      CHECK((weights[k].transpose() * weights[k] - block.transpose() * block / 50).norm() < 1e-10);
    }
    CHECK(penalty_weights(s.x0, 2, 2, GroupPenalty::unweighted).empty());
  }
}
