#pragma once

#include <stdexcept>
#include <string>

namespace poroflow {

/// Bad user input: malformed configuration, out-of-range parameters, unknown names.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a numerical stage (assembly, initial conditions, solve, eigen).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace poroflow
