#pragma once

#include <stdexcept>
#include <string>

namespace hrtfkit {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument violates an operation's precondition (bad shift, negative ka, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed or an algorithm could not produce a result from it.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace hrtfkit
