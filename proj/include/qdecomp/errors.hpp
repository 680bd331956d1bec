#pragma once

#include <stdexcept>
#include <string>

namespace qdecomp {

// Invalid user configuration (unknown column, bad flag value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a precondition (malformed CSV, bad weight, empty cell).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimator could not produce a value for the given sample.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation needs data the sample does not carry (e.g. no enrollment column).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdecomp
