#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aiq {

enum class ErrorCode {
  FileNotFound,
  ParseError,
  SchemaViolation,
  ConfigInvalid,
  UnknownSubject,
  UnknownSession,
  UnknownItem,
  InvalidBattery,
  InvalidState,
  StoreWriteError,
  NotPending,
  OutOfRange,
  SessionIncomplete,
  InvalidWeights,
  ItemResponseMismatch,
  UnsortedObservations,
  ProfileInvalid,
  DuplicateSubject,
  InsufficientData,
  UnknownBaseline,
};

std::string_view to_string(ErrorCode code);

// Domain error. `field` names the offending field, path or id when there is
// one; what() renders as "Code(field): detail".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string field_;
  std::string detail_;
};

}  // namespace aiq
