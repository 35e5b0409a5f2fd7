#pragma once

#include <stdexcept>
#include <string>

namespace forelli {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operands live in different ambient dimensions.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// An argument violates the documented precondition of an operation.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Syntax or name-resolution failure while parsing an expression or file.
class ParseError : public Error {
public:
  ParseError(const std::string& message, int line, int column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

/// Evaluation hit a singular operation (division by zero) at a given point.
class EvalError : public Error {
public:
  EvalError(const std::string& message, std::string subexpression)
      : Error(message + ": " + subexpression), subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

private:
  std::string subexpression_;
};

/// Ill-conditioning, divergence or a refused certificate.
class NumericalError : public Error {
public:
  using Error::Error;
};

}  // namespace forelli
