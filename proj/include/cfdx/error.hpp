#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfdx {

enum class ErrorKind {
  EmptyText,
  ProviderUnavailable,
  BothEmpty,
  NonSubstringSpan,
  BackendError,
  NoOpEdit,
  MissingTag,
  NoLogprobs,
  MissingVar,
  MissingRequiredTag,
  SchemaViolation,
  UnknownRole,
  Timeout,
  RateLimited,
  Unsupported,
  TransportError,
  ScriptMiss,
  UnparseableVerdict,
  EmptyInput,
  LengthMismatch,
  FileNotFound,
  NoValidRecords,
  ParseError,
  ManifestIncomplete,
  InvalidConfig,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Non-fatal condition surfaced alongside a result.
struct Warning {
  std::string code;
  std::string detail;

  bool operator==(const Warning&) const = default;
};

using Warnings = std::vector<Warning>;

}  // namespace cfdx
