#pragma once

#include <stdexcept>
#include <string>

namespace nambu {

// Malformed user input: bad JSON, bad polynomial text, schema violations.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Polynomial text that does not match the grammar. `column` is 1-based.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int column)
      : InputError(what + " at column " + std::to_string(column)), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

// A mathematical precondition is unmet: q < 3, degenerate linear part,
// zero trace when q = n-1, resonance, singular linear part, ...
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A graded linear solve came out inconsistent at some degree.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, int degree)
      : std::runtime_error(what + " (degree " + std::to_string(degree) + ")"), degree_(degree) {}
  int degree() const { return degree_; }

 private:
  int degree_;
};

}  // namespace nambu
