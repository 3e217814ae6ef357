#pragma once

#include <string>
#include <vector>

#include "sparsevar/var_model.hpp"

namespace sparsevar {

// Output shape shared by the sparse estimator and every baseline, so metrics,
// forecasts and impulse responses can take any of them.
struct FitResult {
  std::string method;
  VarCoefficients coefficients;
  ErrorModel error;
  int p = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  // Penalized objective after each outer iteration (sparse estimator only).
  std::vector<double> objective_trace;
  double bic = 0.0;
  bool converged = true;
  int iterations = 0;
  // Series labels and the means removed before fitting.
  std::vector<std::string> names;
  Vector means;
};

}  // namespace sparsevar
