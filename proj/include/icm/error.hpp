// Error kinds shared by every icm module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icm {

enum class ErrorKind {
  InvalidArgument,
  InvalidDimension,
  UnexpectedDiagonal,
  IndexOutOfRange,
  NegativeEntry,
  ColumnSumViolation,
  NonFinite,
  NegativeWealth,
  OverSpending,
  DimensionMismatch,
  SizeCapExceeded,
  NotStronglyConnected,
  NotPrimitive,
  ExponentCapExceeded,
  Unreachable,
  NotCohesive,
  NotZeroSum,
  NotPositive,
  NotPureHoarder,
  SubEconomyNotWhole,
  SingularSystem,
  InvalidPartition,
  InvalidSupportEvent,
  InsufficientDonorWealth,
  HorizonRequired,
  PatternBroken,
  InvalidTransaction,
  ZeroWealthPayer,
  MissingWealth,
  EmptyWindow,
  UnknownProfile,
  InvariantViolation,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::UnexpectedDiagonal: return "UnexpectedDiagonal";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::ColumnSumViolation: return "ColumnSumViolation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NegativeWealth: return "NegativeWealth";
    case ErrorKind::OverSpending: return "OverSpending";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorKind::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorKind::NotPrimitive: return "NotPrimitive";
    case ErrorKind::ExponentCapExceeded: return "ExponentCapExceeded";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::NotCohesive: return "NotCohesive";
    case ErrorKind::NotZeroSum: return "NotZeroSum";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::NotPureHoarder: return "NotPureHoarder";
    case ErrorKind::SubEconomyNotWhole: return "SubEconomyNotWhole";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::InvalidPartition: return "InvalidPartition";
    case ErrorKind::InvalidSupportEvent: return "InvalidSupportEvent";
    case ErrorKind::InsufficientDonorWealth: return "InsufficientDonorWealth";
    case ErrorKind::HorizonRequired: return "HorizonRequired";
    case ErrorKind::PatternBroken: return "PatternBroken";
    case ErrorKind::InvalidTransaction: return "InvalidTransaction";
    case ErrorKind::ZeroWealthPayer: return "ZeroWealthPayer";
    case ErrorKind::MissingWealth: return "MissingWealth";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::UnknownProfile: return "UnknownProfile";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Domain error raised by every icm operation. `kind()` is stable and is what
/// the CLI reports; `what()` carries the human-readable detail.
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

}  // namespace icm
