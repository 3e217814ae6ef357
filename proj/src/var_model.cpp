#include "sparsevar/var_model.hpp"

#include <cmath>
#include <sstream>

#include "sparsevar/errors.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

VarCoefficients VarCoefficients::zeros(int q, int p) {
  VarCoefficients out;
  out.lags.assign(static_cast<std::size_t>(p), Matrix::Zero(q, q));
  return out;
}

Matrix VarCoefficients::design_matrix() const {
  const int nq = q();
  const int np = p();
  Matrix b(static_cast<Eigen::Index>(np) * nq, nq);
  for (int l = 0; l < np; ++l) b.middleRows(static_cast<Eigen::Index>(l) * nq, nq) = lags[l].transpose();
  return b;
}

VarCoefficients VarCoefficients::from_design_matrix(const Matrix& b, int q, int p) {
  if (b.rows() != static_cast<Eigen::Index>(p) * q || b.cols() != q)
    throw DimensionError("coefficient matrix must be pq x q");
  VarCoefficients out;
  out.lags.reserve(static_cast<std::size_t>(p));
  for (int l = 0; l < p; ++l) out.lags.push_back(b.middleRows(static_cast<Eigen::Index>(l) * q, q).transpose());
  return out;
}

Vector VarCoefficients::stacked() const {
  const Matrix b = design_matrix();
  return Eigen::Map<const Vector>(b.data(), b.size());
}

VarCoefficients VarCoefficients::from_stacked(const Vector& beta, int q, int p) {
  if (beta.size() != static_cast<Eigen::Index>(p) * q * q)
    throw DimensionError("stacked coefficient vector must have length p*q^2");
  const Eigen::Map<const Matrix> b(beta.data(), static_cast<Eigen::Index>(p) * q, q);
  return from_design_matrix(b, q, p);
}

void VarCoefficients::validate() const {
  if (lags.empty()) throw DimensionError("VAR needs at least one lag matrix");
  const auto nq = lags.front().rows();
  if (nq == 0) throw DimensionError("VAR dimension must be positive");
  for (std::size_t j = 0; j < lags.size(); ++j) {
    if (lags[j].rows() != nq || lags[j].cols() != nq) {
      std::ostringstream msg;
      msg << "lag matrix " << j + 1 << " is " << lags[j].rows() << "x" << lags[j].cols() << ", expected "
          << nq << "x" << nq;
      throw DimensionError(msg.str());
    }
    if (!lags[j].allFinite()) throw DimensionError("lag matrix contains non-finite entries");
  }
}

int VarCoefficients::nonzeros() const {
  int count = 0;
  for (const auto& b : lags) count += static_cast<int>((b.array() != 0.0).count());
  return count;
}

ErrorModel ErrorModel::from_sigma(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("error covariance is not positive definite");
  Matrix omega = llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()));
  omega = 0.5 * (omega + omega.transpose());
  return {0.5 * (sigma + sigma.transpose()), omega};
}

ErrorModel ErrorModel::from_omega(const Matrix& omega) {
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  Matrix sigma = llt.solve(Matrix::Identity(omega.rows(), omega.cols()));
  sigma = 0.5 * (sigma + sigma.transpose());
  return {sigma, 0.5 * (omega + omega.transpose())};
}

TimeSeriesPanel::TimeSeriesPanel(Matrix values, std::vector<std::string> labels)
    : data(std::move(values)), names(std::move(labels)), means(Vector::Zero(data.cols())) {
  if (names.empty()) {
    for (Eigen::Index k = 0; k < data.cols(); ++k) names.push_back("y" + std::to_string(k + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != data.cols())
    throw DimensionError("panel has " + std::to_string(data.cols()) + " columns but " +
                         std::to_string(names.size()) + " names");
}

TimeSeriesPanel TimeSeriesPanel::slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > length()) throw DimensionError("panel slice out of range");
  TimeSeriesPanel out;
  out.data = data.middleRows(first, count);
  out.names = names;
  out.means = means;
  return out;
}

Matrix companion_matrix(const VarCoefficients& coefs) {
  coefs.validate();
  const int q = coefs.q();
  const int p = coefs.p();
  const Eigen::Index dim = static_cast<Eigen::Index>(p) * q;
  Matrix c = Matrix::Zero(dim, dim);
  for (int l = 0; l < p; ++l) c.block(0, static_cast<Eigen::Index>(l) * q, q, q) = coefs.lags[l];
  if (p > 1) c.bottomLeftCorner(dim - q, dim - q).setIdentity();
  return c;
}

double stability_check(const VarCoefficients& coefs) {
  const Matrix c = companion_matrix(coefs);
  Eigen::EigenSolver<Matrix> solver(c, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix propagate_var(const VarCoefficients& coefs, const Matrix& initial, const Matrix& innovations) {
  coefs.validate();
  const int q = coefs.q();
  const int p = coefs.p();
  if (initial.rows() != p || initial.cols() != q) throw DimensionError("initial block must be p x q");
  if (innovations.cols() != q) throw DimensionError("innovations must have q columns");
  const Eigen::Index steps = innovations.rows();
  Matrix path(p + steps, q);
  path.topRows(p) = initial;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Eigen::Index row = p + t;
    Vector next = innovations.row(t).transpose();
    for (int l = 0; l < p; ++l) next.noalias() += coefs.lags[l] * path.row(row - 1 - l).transpose();
    path.row(row) = next.transpose();
  }
  return path.bottomRows(steps);
}

TimeSeriesPanel simulate_var(const VarCoefficients& coefs, const ErrorModel& err, int length, std::uint64_t seed,
                             int burn_in) {
  coefs.validate();
  if (length < 0 || burn_in < 0) throw DimensionError("simulation length and burn-in must be nonnegative");
  if (err.sigma.rows() != coefs.q() || err.sigma.cols() != coefs.q())
    throw DimensionError("error covariance does not match the VAR dimension");
  const double radius = stability_check(coefs);
  if (!(radius < 1.0)) {
    std::ostringstream msg;
    msg << "cannot simulate an unstable VAR: companion spectral radius " << radius << " >= 1";
    throw NumericalError(msg.str());
  }
  Eigen::LLT<Matrix> llt(err.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("error covariance is not positive definite");
  const Matrix lower = llt.matrixL();

  const int q = coefs.q();
  const Eigen::Index total = static_cast<Eigen::Index>(length) + burn_in;
  Rng rng(seed);
  Matrix innovations(total, q);
  Vector z(q);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (int k = 0; k < q; ++k) z(k) = rng.normal();
    innovations.row(t) = (lower * z).transpose();
  }
  const Matrix path = propagate_var(coefs, Matrix::Zero(coefs.p(), q), innovations);
  return TimeSeriesPanel(path.bottomRows(length));
}

StackedDesign stack(const TimeSeriesPanel& panel, int p) {
  if (p < 1) throw DimensionError("lag order must be at least 1");
  const int length = panel.length();
  if (length <= p) {
    throw DimensionError("panel of length " + std::to_string(length) + " is too short for lag order " +
                         std::to_string(p));
  }
  const int q = panel.series();
  const int n = length - p;
  StackedDesign out;
  out.q = q;
  out.p = p;
  out.responses = panel.data.bottomRows(n);
  out.x0.resize(n, static_cast<Eigen::Index>(p) * q);
  for (int l = 0; l < p; ++l) out.x0.middleCols(static_cast<Eigen::Index>(l) * q, q) = panel.data.middleRows(p - 1 - l, n);
  return out;
}

TimeSeriesPanel center(const TimeSeriesPanel& panel) {
  TimeSeriesPanel out = panel;
  if (panel.length() == 0) return out;
  const Vector shift = panel.data.colwise().mean().transpose();
  out.data.rowwise() -= shift.transpose();
  out.means = panel.means + shift;
  return out;
}

TimeSeriesPanel uncenter(const TimeSeriesPanel& panel) {
  TimeSeriesPanel out = panel;
  out.data.rowwise() += panel.means.transpose();
  out.means.setZero();
  return out;
}

}  // namespace sparsevar
