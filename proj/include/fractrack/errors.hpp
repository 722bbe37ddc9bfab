#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractrack {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A scenario or input file that parses but violates an invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        message_(what),
        line_(line),
        column_(column) {}

  // what() without the location suffix.
  const std::string& message() const { return message_; }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

// Numerical failure inside a solver (e.g. a factorization that should not fail).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedConfiguration : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An internal identity that must hold numerically did not.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fractrack
