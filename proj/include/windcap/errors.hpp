#pragma once

#include <stdexcept>
#include <string>

namespace windcap {

/// Base class for all windcap failures that carry a user-facing message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (bad JSON, missing key, wrong type). Carries the
/// file path and the offending field where known.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, const std::string& detail)
      : Error(path + ": " + detail) {}
};

/// Structurally valid input that violates a model invariant. The message
/// names the violated invariant and the offending entity.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Numerical failure with a structured cause (singular matrix, non-PSD
/// correlation, near-singular covariance, ...).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// A model that must be solvable turned out infeasible (e.g. the
/// day-ahead commitment problem). Carries advice on what to inspect.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

/// A solver backend returned a result that violates its contract
/// (e.g. an "optimal" point that does not satisfy the rows).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(what) {}
};

}  // namespace windcap
