#pragma once

#include <stdexcept>
#include <string>

namespace mgrisk {

// Bad argument to a library operation (out-of-range probability, length mismatch, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration value violates one of its invariants.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

// The configuration document does not follow the schema.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// An action or state outside the storage capacity bounds.
class FeasibilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Oracle instance exceeds the enumeration guard.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mgrisk
