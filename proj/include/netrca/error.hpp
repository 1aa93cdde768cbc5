#pragma once

#include <stdexcept>
#include <string>

namespace netrca {

// Base for all library errors. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, invariant violations in loaded data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller passed arguments outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace netrca
