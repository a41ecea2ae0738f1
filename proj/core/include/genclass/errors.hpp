#pragma once

#include <stdexcept>
#include <string>

namespace genclass {

// Every hard failure in the library is an Error with a machine-checkable kind.
// Expected non-fatal outcomes (format failures, validation findings) are
// returned in-band and never thrown.
enum class ErrorKind {
  Config,
  Io,
  Validation,
  InsufficientExamples,
  UnknownId,
  DuplicateId,
  UnknownLabel,
  MissingDefinitions,
  ShotCountMismatch,
  MissingPrediction,
  MissingConfidence,
  MissingUncertainLabel,
  MissingTokenLength,
  RecordExceedsMaxLen,
  EmptySequence,
  ZeroVector,
  DimMismatch,
  Transport,
  Timeout,
  BackendApi,
  ScoringUnsupported,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind);

}  // namespace genclass
