#pragma once

#include <stdexcept>
#include <string>

namespace fsi_beam {

enum class ErrorKind {
  NonPositiveHeight,
  NonPositiveInput,
  SingularLift,
  RankDeficiency,
  CompatibilityViolation,
  InvalidResolution,
  QuadratureUnderflow,
  SingularMass,
  PicardDivergence,
  ContactReached,
  InsufficientWindow,
  SchemaError,
  VersionMismatch,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveHeight: return "NonPositiveHeight";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::SingularLift: return "SingularLift";
    case ErrorKind::RankDeficiency: return "RankDeficiency";
    case ErrorKind::CompatibilityViolation: return "CompatibilityViolation";
    case ErrorKind::InvalidResolution: return "InvalidResolution";
    case ErrorKind::QuadratureUnderflow: return "QuadratureUnderflow";
    case ErrorKind::SingularMass: return "SingularMass";
    case ErrorKind::PicardDivergence: return "PicardDivergence";
    case ErrorKind::ContactReached: return "ContactReached";
    case ErrorKind::InsufficientWindow: return "InsufficientWindow";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fsi_beam
