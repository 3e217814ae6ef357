#pragma once

#include <string>

#include <json.hpp>

#include "sparsevar/fit_result.hpp"

namespace sparsevar::app {

nlohmann::json to_json(const FitResult& fit);
// Throws DataError with the offending key when the document is malformed.
FitResult fit_from_json(const nlohmann::json& doc);

void write_fit(const std::string& path, const FitResult& fit);
FitResult read_fit(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& where);

}  // namespace sparsevar::app
