#include "cqr/error.hpp"

namespace cqr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::TauOutOfRange: return "TauOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnboundedObjective: return "UnboundedObjective";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::RankDeficientVertex: return "RankDeficientVertex";
    case ErrorCode::NonPositiveBreakpoint: return "NonPositiveBreakpoint";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::ResidualCheckFailed: return "ResidualCheckFailed";
    case ErrorCode::TooFewReplicates: return "TooFewReplicates";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::BeyondSupport: return "BeyondSupport";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
  }
  return "Unknown";
}

bool Error::is_data_error() const noexcept {
  switch (code_) {
    case ErrorCode::CycleDetected:
    case ErrorCode::NonPositiveBreakpoint:
    case ErrorCode::WeightOutOfRange:
    case ErrorCode::ResidualCheckFailed:
      return false;
    default:
      return true;
  }
}

}  // namespace cqr
