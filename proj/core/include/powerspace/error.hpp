#pragma once

#include <stdexcept>
#include <string>

namespace powerspace {

/// Coarse classification used by the command-line tool to pick an exit code.
enum class ErrorCategory {
  config,     ///< invalid parameters, schema or parse problems (exit 2)
  numeric,    ///< numerical failure, truncation, basis quality (exit 3)
  invariant,  ///< a checked mathematical inequality was violated (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorCategory::config, what) {}
};

/// Coefficient sequence and spectrum (or basis) lengths disagree.
class AlignmentError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Input that is structurally valid but has no meaningful answer (e.g. a = 0).
class DegenerateInputError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what)
      : Error(ErrorCategory::config, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorCategory::config, what) {}
};

/// An iterative method did not converge; carries the best value seen.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double best_value)
      : Error(ErrorCategory::numeric, what), best_value_(best_value) {}

  double best_value() const noexcept { return best_value_; }

 private:
  double best_value_;
};

/// A quadrature window or series truncation is too small for the requested
/// accuracy.
class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

/// Sampled eigenbasis is not orthonormal (or the Gram matrix is indefinite)
/// within tolerance.
class BasisQualityError : public Error {
 public:
  explicit BasisQualityError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error(ErrorCategory::invariant, what) {}
};

/// Two norms that must vanish together disagree on a sample.
class InconsistencyError : public Error {
 public:
  explicit InconsistencyError(const std::string& what)
      : Error(ErrorCategory::invariant, what) {}
};

}  // namespace powerspace
