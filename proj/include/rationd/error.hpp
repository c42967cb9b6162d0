#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rationd {

enum class ErrorKind {
  UnknownAgent,
  UnknownCategory,
  AgentNotEligible,
  InvalidInstance,
  DimensionMismatch,
  InvalidAllocation,
  IneligibleAssignment,
  EntryOnIneligiblePair,
  EmptyInstance,
  InvalidPerturbation,
  MalformedChoiceOrder,
  NotValidOrNotCS,
  NotRealizable,
  NotValid,
  MissingUtility,
  BudgetExceeded,
  WrongDimension,
  InvalidProbabilityVector,
  QuotaUnderflow,
  LengthMismatch,
  InvalidArgument,
  ParseError,
  Internal,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownAgent: return "UnknownAgent";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::AgentNotEligible: return "AgentNotEligible";
    case ErrorKind::InvalidInstance: return "InvalidInstance";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidAllocation: return "InvalidAllocation";
    case ErrorKind::IneligibleAssignment: return "IneligibleAssignment";
    case ErrorKind::EntryOnIneligiblePair: return "EntryOnIneligiblePair";
    case ErrorKind::EmptyInstance: return "EmptyInstance";
    case ErrorKind::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorKind::MalformedChoiceOrder: return "MalformedChoiceOrder";
    case ErrorKind::NotValidOrNotCS: return "NotValidOrNotCS";
    case ErrorKind::NotRealizable: return "NotRealizable";
    case ErrorKind::NotValid: return "NotValid";
    case ErrorKind::MissingUtility: return "MissingUtility";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::WrongDimension: return "WrongDimension";
    case ErrorKind::InvalidProbabilityVector: return "InvalidProbabilityVector";
    case ErrorKind::QuotaUnderflow: return "QuotaUnderflow";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rationd
