#pragma once

#include <stdexcept>
#include <string>

namespace levy_procure {

// Argument outside the domain of a model or operation (bad grid, u <= -ell, negative inventory...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A hard standing assumption of the model does not hold for the given parameters.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root finder failed or produced a non-finite result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levy_procure
