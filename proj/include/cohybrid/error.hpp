#pragma once

#include <stdexcept>
#include <string>

namespace cohybrid {

// Input violates a documented precondition (bad box, NaN cost, shape mismatch).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unknown head kind, bad PE width, or similar configuration mistakes.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cohybrid
