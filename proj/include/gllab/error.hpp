#pragma once

#include <stdexcept>
#include <string>

namespace gllab {

/// Base class for all library errors. `exit_code()` follows the CLI contract:
/// 1 assertion failure, 2 usage/config error, 3 numerical non-convergence.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace gllab
