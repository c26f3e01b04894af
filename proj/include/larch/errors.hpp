#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace larch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (j = 0, d >= 1/2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series or norm that would not converge.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Parameter vector outside the admissible parameter space.
class ValidationError : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class IncompleteInputError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Not enough pre-sample history to fill the requested number of lags.
class HistoryError : public Error {
 public:
  using Error::Error;
};

class DegenerateWindowError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate in a loss evaluation; carries the offending time index.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t t) : Error(what), t_(t) {}
  [[nodiscard]] std::size_t t() const noexcept { return t_; }

 private:
  std::size_t t_;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Matrix that should be positive definite failed its factorization.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Input file problem, located by 1-based row and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}
  [[nodiscard]] std::size_t row() const noexcept { return row_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace larch
