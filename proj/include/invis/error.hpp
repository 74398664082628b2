#pragma once

#include <stdexcept>
#include <string>

namespace invis {

/// Bad input: malformed layout, config, or argument outside its contract.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (E < 0, k = 0, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterative or adaptive numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace invis
