#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqr {

enum class ErrorCode {
  MalformedRow,
  SingularDesign,
  TauOutOfRange,
  IndexOutOfRange,
  UnboundedObjective,
  CycleDetected,
  RankDeficientVertex,
  NonPositiveBreakpoint,
  WeightOutOfRange,
  ResidualCheckFailed,
  TooFewReplicates,
  TooLarge,
  Infeasible,
  BeyondSupport,
  InvalidArgument,
  TooManyFailures,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
/// Data conditions (MalformedRow, SingularDesign, TauOutOfRange, ...) are
/// recoverable; CycleDetected, NonPositiveBreakpoint, WeightOutOfRange and
/// ResidualCheckFailed indicate a solver defect.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for conditions caused by user input rather than by a bug.
  bool is_data_error() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace cqr
