#pragma once

#include <stdexcept>
#include <string>

namespace fracvar {

/// Input outside the mathematical domain of an operation (non-finite values,
/// coincident kernel arguments, exponents out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent configuration: incompatible quadrature modes, mismatched
/// meshes, wrong model variant.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver precondition is violated (parameter outside a guarded range).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reading input files or writing artifacts failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracvar
