#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covdyn {

enum class ErrorKind {
  DimMismatch,
  NotPositiveDefinite,
  NotUnitary,
  OutOfPatch,
  OutOfOverlap,
  PatchBoundaryCrossed,
  StepperDiverged,
  OmegaNotPseudoHermitian,
  TauNotInOverlap,
  PoleAmbiguity,
  CurveTouchesPoleMargin,
  ZeroState,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::OutOfPatch: return "OutOfPatch";
    case ErrorKind::OutOfOverlap: return "OutOfOverlap";
    case ErrorKind::PatchBoundaryCrossed: return "PatchBoundaryCrossed";
    case ErrorKind::StepperDiverged: return "StepperDiverged";
    case ErrorKind::OmegaNotPseudoHermitian: return "OmegaNotPseudoHermitian";
    case ErrorKind::TauNotInOverlap: return "TauNotInOverlap";
    case ErrorKind::PoleAmbiguity: return "PoleAmbiguity";
    case ErrorKind::CurveTouchesPoleMargin: return "CurveTouchesPoleMargin";
    case ErrorKind::ZeroState: return "ZeroState";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace covdyn
