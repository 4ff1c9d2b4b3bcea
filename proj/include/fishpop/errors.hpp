#pragma once

#include <stdexcept>
#include <string>

namespace fishpop {

/// Base of every error raised by the library. `exit_code()` is the CLI
/// process status for the error category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* category() const noexcept { return "error"; }
};

/// Syntax or schema problem in a scenario, table or expression.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = -1, int column = -1)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  int exit_code() const noexcept override { return 2; }
  const char* category() const noexcept override { return "parse"; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line < 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

/// The model data violates an assumption (e.g. L_b >= L_m, theta <= 0).
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* category() const noexcept override { return "validation"; }
};

/// Singular systems, non-finite values, non-convergent iterations.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* category() const noexcept override { return "numerical"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
  const char* category() const noexcept override { return "io"; }
};

}  // namespace fishpop
