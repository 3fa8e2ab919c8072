#pragma once

#include <stdexcept>
#include <string>

namespace kuq {

// Failure categories, doubling as CLI exit codes. Code 2 covers bad usage or
// unreadable input, 3 covers violated mathematical preconditions, 4 covers
// numerical breakdown during an otherwise well-posed computation.
enum class ErrorCategory : int {
  Input = 2,
  Precondition = 3,
  Numerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

// ----- usage / input errors (exit code 2) -----

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class EmptyWindow : public Error {
 public:
  explicit EmptyWindow(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::Input, message) {}
};

// ----- violated math preconditions (exit code 3) -----

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& message)
      : Error(ErrorCategory::Precondition, message) {}
};

class DegenerateVariance : public Error {
 public:
  explicit DegenerateVariance(const std::string& message)
      : Error(ErrorCategory::Precondition, message) {}
};

class DegreesOfFreedomError : public Error {
 public:
  explicit DegreesOfFreedomError(const std::string& message)
      : Error(ErrorCategory::Precondition, message) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& message)
      : Error(ErrorCategory::Precondition, message) {}
};

class NotSymmetric : public Error {
 public:
  explicit NotSymmetric(const std::string& message)
      : Error(ErrorCategory::Precondition, message) {}
};

// ----- numerical failures (exit code 4) -----

class InvalidMatrix : public Error {
 public:
  explicit InvalidMatrix(const std::string& message)
      : Error(ErrorCategory::Numerical, message) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message)
      : Error(ErrorCategory::Numerical, message) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message)
      : Error(ErrorCategory::Numerical, message) {}
};

}  // namespace kuq
