#include "cfdx/error.hpp"

namespace cfdx {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::BothEmpty: return "BothEmpty";
    case ErrorKind::NonSubstringSpan: return "NonSubstringSpan";
    case ErrorKind::BackendError: return "BackendError";
    case ErrorKind::NoOpEdit: return "NoOpEdit";
    case ErrorKind::MissingTag: return "MissingTag";
    case ErrorKind::NoLogprobs: return "NoLogprobs";
    case ErrorKind::MissingVar: return "MissingVar";
    case ErrorKind::MissingRequiredTag: return "MissingRequiredTag";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::UnknownRole: return "UnknownRole";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::ScriptMiss: return "ScriptMiss";
    case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::NoValidRecords: return "NoValidRecords";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ManifestIncomplete: return "ManifestIncomplete";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

}  // namespace cfdx
