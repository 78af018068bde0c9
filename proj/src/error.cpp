#include "aiq/error.hpp"

namespace aiq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnknownSubject: return "UnknownSubject";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::InvalidBattery: return "InvalidBattery";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::StoreWriteError: return "StoreWriteError";
    case ErrorCode::NotPending: return "NotPending";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SessionIncomplete: return "SessionIncomplete";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::ItemResponseMismatch: return "ItemResponseMismatch";
    case ErrorCode::UnsortedObservations: return "UnsortedObservations";
    case ErrorCode::ProfileInvalid: return "ProfileInvalid";
    case ErrorCode::DuplicateSubject: return "DuplicateSubject";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UnknownBaseline: return "UnknownBaseline";
  }
  return "Unknown";
}

namespace {

std::string render(ErrorCode code, const std::string& field, const std::string& detail) {
  std::string out(to_string(code));
  if (!field.empty()) out += "(" + field + ")";
  if (!detail.empty()) out += ": " + detail;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string field, std::string detail)
    : std::runtime_error(render(code, field, detail)),
      code_(code),
      field_(std::move(field)),
      detail_(std::move(detail)) {}

}  // namespace aiq
