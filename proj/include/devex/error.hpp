#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace devex {

enum class ErrorKind {
  NonPositiveProbability,
  NotNormalized,
  DuplicateLabel,
  AlphabetMismatch,
  DomainError,
  DegenerateIncrements,
  OutOfDomain,
  NoConvergence,
  InadmissibleThresholds,
  NotBinary,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateIncrements: return "DegenerateIncrements";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InadmissibleThresholds: return "InadmissibleThresholds";
    case ErrorKind::NotBinary: return "NotBinary";
  }
  return "Unknown";
}

// Every failure raised by the library. what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace devex
