#include <doctest.h>

#include "sparsevar/benchmarks.hpp"
#include "sparsevar/errors.hpp"
#include "support.hpp"

using namespace sparsevar;
using namespace sparsevar::benchmarks;

namespace {

VarCoefficients design() {
  auto c = VarCoefficients::zeros(3, 2);
  c.lags[0].diagonal() << 0.5, 0.4, 0.3;
  c.lags[0](2, 0) = 0.3;
  c.lags[1](0, 0) = 0.2;
  return c;
}

TimeSeriesPanel panel(int length, std::uint64_t seed) {
  return center(simulate_var(design(), ErrorModel::from_sigma(Matrix::Identity(3, 3)), length, seed));
}

Matrix ols(const StackedDesign& s) { return (s.x0.transpose() * s.x0).ldlt().solve(s.x0.transpose() * s.responses); }

}  // namespace

TEST_SUITE("benchmarks") {
  TEST_CASE("least squares matches the normal equations") {
    const auto p = panel(80, 1);
    const auto fit = ls_fit(p, 2);
    const auto s = stack(p, 2);
    CHECK((fit.coefficients.design_matrix() - ols(s)).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix e = s.responses - s.x0 * ols(s);
    CHECK((fit.error.sigma - e.transpose() * e / s.n()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.method == "ls");
  }

  TEST_CASE("least squares recovers noise-free coefficients exactly") {
    Rng rng(2);
    const Matrix init = testing::random_matrix(rng, 2, 3);
    const Matrix excite = propagate_var(design(), init, testing::random_matrix(rng, 40, 3));
    // Responses generated from the lags without noise.
    StackedDesign exact = stack(TimeSeriesPanel(excite), 2);
    exact.responses = exact.x0 * design().design_matrix();
    CHECK((ols(exact) - design().design_matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("least squares needs enough rows") {
    CHECK_THROWS_AS(ls_fit(panel(6, 1), 2), DimensionError);
  }

  TEST_CASE("one-step restricted LS drops regressors with |t| <= 1") {
    const auto p = panel(60, 4);
    const auto s = stack(p, 2);
    const auto fit = restricted_ls_1step(p, 2);
    const Matrix b = ols(s);
    const Matrix e = s.responses - s.x0 * b;
    const Matrix inv = (s.x0.transpose() * s.x0).inverse();
    const int n = s.n(), k = 6;
    const Matrix dm = fit.coefficients.design_matrix();
    for (int i = 0; i < 3; ++i) {
      const double s2 = e.col(i).squaredNorm() / (n - k);
      std::vector<int> keep;
      for (int j = 0; j < k; ++j)
        if (std::abs(b(j, i)) / std::sqrt(s2 * inv(j, j)) > 1.0) keep.push_back(j);
      Matrix xs(n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) xs.col(static_cast<Eigen::Index>(c)) = s.x0.col(keep[c]);
      const Vector refit = (xs.transpose() * xs).ldlt().solve(xs.transpose() * s.responses.col(i));
      Vector expected = Vector::Zero(k);
      for (std::size_t c = 0; c < keep.size(); ++c) expected(keep[c]) = refit(static_cast<Eigen::Index>(c));
      CHECK((dm.col(i) - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("iterative restricted LS never worsens the equation BIC") {
    const auto p = panel(60, 5);
    const auto s = stack(p, 2);
    const auto fit = restricted_ls_iterative(p, 2);
    const Matrix dm = fit.coefficients.design_matrix();
    const Matrix full = ols(s);
    const int n = s.n();
    for (int i = 0; i < 3; ++i) {
      const double rss_full = (s.responses.col(i) - s.x0 * full.col(i)).squaredNorm();
      const double rss = (s.responses.col(i) - s.x0 * dm.col(i)).squaredNorm();
      const int kept = static_cast<int>((dm.col(i).array() != 0.0).count());
      CHECK(n * std::log(rss / n) + kept * std::log(n) <= n * std::log(rss_full / n) + 6 * std::log(n) + 1e-9);
    }
    CHECK(fit.coefficients.nonzeros() < 18);
  }

  TEST_CASE("normal posterior mean interpolates prior and least squares") {
    Rng rng(6);
    const Matrix x = testing::random_matrix(rng, 30, 3);
    const Vector y = testing::random_matrix(rng, 30, 1);
    const Vector ls = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    const Vector m0 = Vector::Constant(3, 0.7);
    CHECK((normal_posterior_mean(x, y, m0, Vector::Constant(3, 1e12), 1.0) - ls).norm() < 1e-8);
    CHECK((normal_posterior_mean(x, y, m0, Vector::Constant(3, 1e-14), 1.0) - m0).norm() < 1e-8);
    const Vector v = Vector::Constant(3, 0.5);
    const Matrix prec = x.transpose() * x / 2.0 + Matrix(v.cwiseInverse().asDiagonal());
    const Vector expected = prec.ldlt().solve(x.transpose() * y / 2.0 + Vector(v.cwiseInverse().cwiseProduct(m0)));
    CHECK((normal_posterior_mean(x, y, m0, v, 2.0) - expected).norm() < 1e-12);
  }

  TEST_CASE("minnesota prior variances follow the lag decay") {
    const Vector ar(Eigen::Vector2d(1.0, 4.0));
    MinnesotaHyper h;
    h.tightness = 0.2;
    h.cross_weight = 0.5;
    const Matrix v = minnesota_prior_variances(ar, 2, h);
    // Row l*q + j, column i.
    CHECK(v(0, 0) == doctest::Approx(0.04));
    CHECK(v(2, 0) == doctest::Approx(0.01));
    CHECK(v(1, 0) == doctest::Approx(0.01 * 1.0 / 4.0));
    CHECK(v(0, 1) == doctest::Approx(0.01 * 4.0));
  }

  TEST_CASE("minnesota shrinks toward zero and relaxes to least squares") {
    const auto p = panel(80, 7);
    MinnesotaHyper tight;
    tight.tightness = 1e-6;
    CHECK(minnesota_fit(p, 2, tight).coefficients.design_matrix().cwiseAbs().maxCoeff() < 1e-6);
    MinnesotaHyper loose;
    loose.tightness = 1e6;
    loose.cross_weight = 1.0;
    CHECK((minnesota_fit(p, 2, loose).coefficients.design_matrix() - ls_fit(p, 2).coefficients.design_matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-6);
    MinnesotaHyper bad;
    bad.tightness = -1;
    CHECK_THROWS_AS(minnesota_fit(p, 2, bad), ConfigError);
  }

  TEST_CASE("NIW posterior follows the conjugate update") {
    const auto p = panel(60, 8);
    const auto s = stack(p, 2);
    NiwHyper h;
    h.prior_mean = Matrix::Constant(6, 3, 0.1);
    h.omega0 = Matrix::Identity(6, 6) * 0.5;
    h.s0 = Matrix::Identity(3, 3);
    h.nu0 = 6;
    const auto post = niw_posterior(p, 2, h);
    const Matrix prior_prec = h.omega0.inverse();
    const Matrix prec = prior_prec + s.x0.transpose() * s.x0;
    const Matrix mean = prec.ldlt().solve(prior_prec * h.prior_mean + s.x0.transpose() * s.responses);
    CHECK((post.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(post.dof == doctest::Approx(6 + s.n()));
    const auto fit = niw_fit(p, 2, h);
    CHECK((fit.coefficients.design_matrix() - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(testing::is_positive_definite(fit.error.sigma));
    h.nu0 = 3;
    CHECK_THROWS_AS(niw_fit(p, 2, h), ConfigError);
  }
}
