#pragma once

#include <stdexcept>
#include <string>

namespace crsdkit {

// Malformed or contract-violating input. Maps to CLI exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written. Maps to CLI exit status 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Factorization failure or non-finite intermediate. Maps to CLI exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crsdkit
