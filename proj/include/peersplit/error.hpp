#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peersplit {

enum class ErrorCode {
  BadDimension,
  NonPositiveEntry,
  NonFiniteEntry,
  ReciprocityViolation,
  IncompleteMatrix,
  NoConvergence,
  DisconnectedGraph,
  DimensionMismatch,
  SingularSystem,
  InvalidConfig,
  ParseError,
  SchemaError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::ReciprocityViolation: return "ReciprocityViolation";
    case ErrorCode::IncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

// Single exception type for the library; callers dispatch on code().
// expert() names the panel member whose data triggered the error, if any.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::string expert = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        expert_(std::move(expert)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& expert() const noexcept { return expert_; }

 private:
  ErrorCode code_;
  std::string expert_;
};

}  // namespace peersplit
