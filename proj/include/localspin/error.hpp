#pragma once

#include <stdexcept>
#include <string>

namespace localspin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed Biq Mac / JSON input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A precondition on a value (dimension, hyperparameter, family parameter) failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Instance has only zero weights, so c-bar and the misfit are undefined.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

/// The exact enumerator refuses instances above its vertex cap.
class OracleCapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace localspin
