#pragma once

#include <stdexcept>
#include <string>

namespace ngmc {

// Bad user-supplied input: malformed CSV, inconsistent dimensions,
// hyperparameters outside their domain.  The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at run time: non-convergent quadrature, Cholesky
// breakdown, a rejection envelope that turned out not to dominate.
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ngmc
