#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcone {

enum class ErrorKind {
  InvalidBandlimit,
  GridTooCoarse,
  ShapeMismatch,
  BandlimitMismatch,
  DegenerateSection,
  NotRestrictedLorentz,
  MappedSectionInvalid,
  InvalidReferenceVector,
  BalanceFailed,
  FlowSingular,
  StepLimitExceeded,
  MonitorUndefined,
  InvalidInput,
  InvalidRhs,
  SRangeTooLarge,
  PreconditionViolated,
  GenerationFailed,
  ParseError,
  InternalError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidBandlimit: return "invalid-bandlimit";
    case ErrorKind::GridTooCoarse: return "grid-too-coarse";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::BandlimitMismatch: return "bandlimit-mismatch";
    case ErrorKind::DegenerateSection: return "degenerate-section";
    case ErrorKind::NotRestrictedLorentz: return "not-a-restricted-lorentz-transform";
    case ErrorKind::MappedSectionInvalid: return "mapped-section-invalid";
    case ErrorKind::InvalidReferenceVector: return "invalid-reference-vector";
    case ErrorKind::BalanceFailed: return "balance-failed";
    case ErrorKind::FlowSingular: return "flow-singular";
    case ErrorKind::StepLimitExceeded: return "step-limit-exceeded";
    case ErrorKind::MonitorUndefined: return "monitor-undefined";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidRhs: return "invalid-rhs";
    case ErrorKind::SRangeTooLarge: return "s-range-too-large";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
    case ErrorKind::GenerationFailed: return "generation-failed";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::InternalError: return "internal-error";
  }
  return "unknown";
}

/// Exception carrying a machine-readable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lcone
