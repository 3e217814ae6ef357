#include <doctest.h>

#include "sparsevar/errors.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"
#include "sparsevar/var_model.hpp"
#include "support.hpp"

using namespace sparsevar;

TEST_SUITE("var_model") {
  TEST_CASE("stacked layout matches the design matrix") {
    auto coefs = VarCoefficients::zeros(3, 2);
    Rng rng(4);
    for (auto& lag : coefs.lags) lag = testing::random_matrix(rng, 3, 3);
    const Vector beta = coefs.stacked();
    const Matrix b = coefs.design_matrix();
    CHECK(beta.size() == 18);
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 3; ++k) {
          CHECK(beta(i * 6 + l * 3 + k) == coefs.lags[l](i, k));
          CHECK(b(l * 3 + k, i) == coefs.lags[l](i, k));
        }
    CHECK((Eigen::Map<const Vector>(b.data(), b.size()) - beta).norm() == 0.0);
    const auto back = VarCoefficients::from_stacked(beta, 3, 2);
    CHECK(back.lags[1] == coefs.lags[1]);
    CHECK(VarCoefficients::from_design_matrix(b, 3, 2).lags[0] == coefs.lags[0]);
  }

  TEST_CASE("stack builds lagged regressors") {
    Matrix data(5, 2);
    data << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50;
    const auto s = stack(TimeSeriesPanel(data), 2);
    CHECK(s.n() == 3);
    CHECK(s.x0.cols() == 4);
    // Row 0 predicts t = 2 from lag 1 (t = 1) and lag 2 (t = 0).
    CHECK(s.responses(0, 0) == 3);
    CHECK(s.x0(0, 0) == 2);
    CHECK(s.x0(0, 1) == 20);
    CHECK(s.x0(0, 2) == 1);
    CHECK(s.x0(0, 3) == 10);
    CHECK(s.y()(3) == 30);
  }

  TEST_CASE("stacked regression reproduces the recursion") {
    auto coefs = VarCoefficients::zeros(3, 2);
    coefs.lags[0] = Matrix::Identity(3, 3) * 0.4;
    coefs.lags[0](2, 0) = 0.2;
    coefs.lags[1](1, 1) = -0.3;
    Rng rng(9);
    const Matrix innov = testing::random_matrix(rng, 40, 3);
    const Matrix init = Matrix::Zero(2, 3);
    const Matrix y = propagate_var(coefs, init, innov);
    const auto s = stack(TimeSeriesPanel(y), 2);
    const Matrix resid = s.responses - s.x0 * coefs.design_matrix();
    CHECK((resid - innov.bottomRows(38)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("simulation is seeded and matches the innovation covariance") {
    auto coefs = VarCoefficients::zeros(2, 1);
    coefs.lags[0] << 0.5, 0.1, 0.0, 0.3;
    Matrix sigma(2, 2);
    sigma << 1.0, 0.3, 0.3, 0.5;
    const auto err = ErrorModel::from_sigma(sigma);
    CHECK((err.sigma * err.omega - Matrix::Identity(2, 2)).norm() < 1e-12);
    const auto a = simulate_var(coefs, err, 4000, 11);
    const auto b = simulate_var(coefs, err, 4000, 11);
    CHECK(a.data == b.data);
    CHECK(simulate_var(coefs, err, 50, 12).data != a.data.topRows(50));
    const auto s = stack(a, 1);
    const Matrix e = s.responses - s.x0 * coefs.design_matrix();
    const Matrix cov = e.transpose() * e / e.rows();
    CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.06);
  }

  TEST_CASE("stability check uses the companion matrix") {
    auto coefs = VarCoefficients::zeros(2, 2);
    coefs.lags[0] = Matrix::Identity(2, 2) * 0.5;
    CHECK(stability_check(coefs) == doctest::Approx(0.5));
    // AR(2) with roots of z^2 - 1.2 z + 0.35: 0.7 and 0.5.
    coefs.lags[0] = Matrix::Identity(2, 2) * 1.2;
    coefs.lags[1] = Matrix::Identity(2, 2) * -0.35;
    CHECK(stability_check(coefs) == doctest::Approx(0.7));
    CHECK(companion_matrix(coefs).rows() == 4);
    coefs.lags[0] = Matrix::Identity(2, 2) * 1.01;
    coefs.lags[1].setZero();
    CHECK_FALSE(is_stable(coefs));
    CHECK_THROWS_AS(simulate_var(coefs, ErrorModel::from_sigma(Matrix::Identity(2, 2)), 10, 1), NumericalError);
  }

  TEST_CASE("validation rejects malformed coefficients") {
    VarCoefficients none;
    CHECK_THROWS_AS(none.validate(), DimensionError);
    auto coefs = VarCoefficients::zeros(2, 1);
    coefs.lags[0] = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(coefs.validate(), DimensionError);
    coefs.lags[0] = Matrix::Zero(2, 2);
    coefs.lags[0](0, 0) = NAN;
    CHECK_THROWS_AS(coefs.validate(), DimensionError);
  }

  TEST_CASE("centering stores and restores means") {
    Matrix data(3, 2);
    data << 1, 4, 2, 5, 3, 9;
    const auto c = center(TimeSeriesPanel(data, {"a", "b"}));
    CHECK(c.means(0) == doctest::Approx(2));
    CHECK(c.means(1) == doctest::Approx(6));
    CHECK(c.data.colwise().sum().norm() < 1e-12);
    CHECK((uncenter(c).data - data).norm() < 1e-12);
    CHECK(c.slice(1, 2).names == c.names);
  }

  TEST_CASE("rng streams are independent of scheduling") {
    std::vector<double> serial(16), parallel(16);
    for (std::size_t i = 0; i < 16; ++i) serial[i] = Rng::stream(5, i).normal();
    parallel_for(16, [&](std::size_t i) { parallel[i] = Rng::stream(5, i).normal(); });
    CHECK(serial == parallel);
    CHECK(Rng::stream(5, 0).next_u64() != Rng::stream(5, 1).next_u64());
    Rng rng(3);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / 20000) < 0.03);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
  }

  TEST_CASE("parallel_for rethrows the first failure") {
    CHECK_THROWS_AS(parallel_for(8, [](std::size_t i) {
                      if (i == 3) throw DataError("boom");
                    }),
                    DataError);
  }
}
