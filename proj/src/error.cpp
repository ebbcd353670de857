#include "darkroom/error.hpp"

namespace darkroom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Lookup: return "lookup_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::DanglingReference: return "dangling_reference";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::CorruptPayload: return "corrupt_payload";
    case ErrorCode::Schema: return "schema_error";
    case ErrorCode::UnknownFilter: return "unknown_filter";
    case ErrorCode::TypeMismatch: return "type_mismatch";
    case ErrorCode::Cycle: return "cycle";
    case ErrorCode::UnconnectedInput: return "unconnected_input";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::MissingChannel: return "missing_channel";
  }
  return "unknown";
}

nlohmann::json Error::to_json() const {
  return {{"code", std::string(to_string(code_))}, {"message", what()}, {"details", details_}};
}

}  // namespace darkroom
