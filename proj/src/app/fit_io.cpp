#include "sparsevar/app/fit_io.hpp"

#include <fstream>

#include "sparsevar/app/csv.hpp"
#include "sparsevar/errors.hpp"

namespace sparsevar::app {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& doc, const std::string& where) {
  if (!doc.is_array()) throw DataError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(doc[0].is_array() ? doc[0].size() : 0) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = doc[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError(where + "[" + std::to_string(r) + "]: rows must be arrays of equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw DataError(where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]: expected a number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json to_json(const FitResult& fit) {
  json doc;
  doc["method"] = fit.method;
  doc["p"] = fit.p;
  doc["q"] = fit.coefficients.q();
  doc["lambda1"] = fit.lambda1;
  doc["lambda2"] = fit.lambda2;
  doc["bic"] = fit.bic;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  doc["names"] = fit.names;
  json means = json::array();
  for (Eigen::Index k = 0; k < fit.means.size(); ++k) means.push_back(fit.means(k));
  doc["means"] = means;
  json lags = json::array();
  for (const auto& lag : fit.coefficients.lags) lags.push_back(matrix_to_json(lag));
  doc["lags"] = lags;
  doc["sigma"] = matrix_to_json(fit.error.sigma);
  doc["omega"] = matrix_to_json(fit.error.omega);
  doc["objective_trace"] = fit.objective_trace;
  return doc;
}

namespace {

const json& field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw DataError(std::string("fit file: missing key '") + key + "'");
  return doc.at(key);
}

}  // namespace

FitResult fit_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("fit file: expected a JSON object");
  FitResult fit;
  try {
    fit.method = field(doc, "method").get<std::string>();
    fit.p = field(doc, "p").get<int>();
    fit.lambda1 = doc.value("lambda1", 0.0);
    fit.lambda2 = doc.value("lambda2", 0.0);
    fit.bic = doc.value("bic", 0.0);
    fit.converged = doc.value("converged", true);
    fit.iterations = doc.value("iterations", 0);
    fit.names = doc.value("names", std::vector<std::string>{});
    const auto means = doc.value("means", std::vector<double>{});
    fit.means = Eigen::Map<const Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
    fit.objective_trace = doc.value("objective_trace", std::vector<double>{});
  } catch (const json::exception& e) {
    throw DataError(std::string("fit file: ") + e.what());
  }
  const json& lags = field(doc, "lags");
  if (!lags.is_array()) throw DataError("fit file: 'lags' must be an array");
  for (std::size_t l = 0; l < lags.size(); ++l)
    fit.coefficients.lags.push_back(matrix_from_json(lags[l], "lags[" + std::to_string(l) + "]"));
  fit.coefficients.validate();
  if (fit.p != fit.coefficients.p()) throw DataError("fit file: 'p' disagrees with the number of lag matrices");
  const Matrix sigma = matrix_from_json(field(doc, "sigma"), "sigma");
  const Matrix omega = matrix_from_json(field(doc, "omega"), "omega");
  if (sigma.rows() != fit.coefficients.q() || omega.rows() != fit.coefficients.q())
    throw DataError("fit file: error covariance does not match the coefficient dimension");
  fit.error.sigma = sigma;
  fit.error.omega = omega;
  if (!fit.names.empty() && static_cast<int>(fit.names.size()) != fit.coefficients.q())
    throw DataError("fit file: 'names' does not match the coefficient dimension");
  return fit;
}

void write_fit(const std::string& path, const FitResult& fit) { write_file(path, to_json(fit).dump(2) + "\n"); }

FitResult read_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return fit_from_json(doc);
}

}  // namespace sparsevar::app
