#pragma once

#include <stdexcept>
#include <string>

namespace nrs {

// Bad input data, bad configuration, or a pipeline precondition that does not
// hold. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written. The CLI maps this to exit 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A personalized model cannot score a user (no training interactions).
class ColdUserError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace nrs
