#ifndef CIRCLELAB_ERRORS_HPP_
#define CIRCLELAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace circlelab {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 1, IoError -> 2, DomainError / NumericalError -> 3.

// Invalid configuration or hyperparameter value (bad spec field, unknown
// config key, mismatched schedule lengths).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime input outside the legal numeric domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// File system or serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value produced where the math guarantees a finite one.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace circlelab

#endif  // CIRCLELAB_ERRORS_HPP_
