#pragma once

#include <stdexcept>
#include <string>

namespace sparsevar {

// Base for every error the library raises. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used as given (bad CSV, wrong shape, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// A numerical routine could not produce a valid answer (singular Gram
// matrix, non-PD covariance, unstable system).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsevar
