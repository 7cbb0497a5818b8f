#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckit {

enum class ErrorCode {
  NotPositiveDefinite,
  NotSymmetric,
  ConvergenceFailure,
  OutOfDomain,
  DimMismatch,
  AlphaOutOfRange,
  NoRootInUnitInterval,
  ScaleIsOne,
  ConjugateUnavailable,
  InvalidSimplexPoint,
  QuadratureNonConvergent,
  UnboundedRatio,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::NoRootInUnitInterval: return "NoRootInUnitInterval";
    case ErrorCode::ScaleIsOne: return "ScaleIsOne";
    case ErrorCode::ConjugateUnavailable: return "ConjugateUnavailable";
    case ErrorCode::InvalidSimplexPoint: return "InvalidSimplexPoint";
    case ErrorCode::QuadratureNonConvergent: return "QuadratureNonConvergent";
    case ErrorCode::UnboundedRatio: return "UnboundedRatio";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by bad input rather than by a numerical routine.
  bool is_validation() const noexcept {
    switch (code_) {
      case ErrorCode::ConvergenceFailure:
      case ErrorCode::NoRootInUnitInterval:
      case ErrorCode::QuadratureNonConvergent:
      case ErrorCode::UnboundedRatio:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace ckit
