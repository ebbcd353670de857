#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace darkroom {

// Error categories shared by the library, the CLI exit-code mapping and the
// HTTP status mapping of the service.
enum class ErrorCode {
  InvalidArgument,
  Parse,
  Lookup,
  Io,
  NotFound,
  DanglingReference,
  VersionMismatch,
  CorruptPayload,
  Schema,
  UnknownFilter,
  TypeMismatch,
  Cycle,
  UnconnectedInput,
  OutOfRange,
  MissingChannel,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  // {code, message, details}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace darkroom
